#include "gsrsep/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

namespace gsrsep::io {
namespace {

constexpr std::uint16_t kWavePcm = 1;
constexpr std::uint16_t kWaveFloat = 3;
constexpr std::uint16_t kWaveExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  void seek(std::size_t pos) { pos_ = pos; }

  bool has(std::size_t n) const noexcept { return remaining() >= n; }

  std::uint16_t u16() { return static_cast<std::uint16_t>(take(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
  std::uint64_t u64() { return take(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view tag() {
    require(4);
    std::string_view v(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return v;
  }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    require(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void require(std::size_t n) const {
    if (!has(n)) throw ParseError("unexpected end of data at byte " + std::to_string(pos_), pos_);
  }
  std::uint64_t take(std::size_t n) {
    require(n);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

class ByteWriter {
 public:
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
  void raw(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  void reserve(std::size_t n) { out_.reserve(n); }

 private:
  void put(std::uint64_t v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
  std::vector<std::uint8_t> out_;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFull) throw InvalidArgument(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc{}) throw InvalidArgument("cannot format value " + std::to_string(v));
  return std::string(buf, ptr);
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// ---- WAV -----------------------------------------------------------------

dsp::AudioClip parse_wav(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (!r.has(12)) throw ParseError("truncated RIFF header: missing 'RIFF' chunk", r.offset());
  if (r.tag() != "RIFF") throw ParseError("not a RIFF file: missing 'RIFF' chunk id at byte 0", 0);
  r.u32();
  if (r.tag() != "WAVE") throw ParseError("RIFF form type is not 'WAVE' at byte 8", 8);

  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  while (r.remaining() >= 8 && !have_data) {
    const std::size_t chunk_at = r.offset();
    const std::string_view id = r.tag();
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      if (size < 16 || !r.has(size)) throw ParseError("truncated 'fmt ' chunk at byte " + std::to_string(chunk_at), chunk_at);
      const std::size_t body = r.offset();
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      block_align = r.u16();
      bits = r.u16();
      if (format == kWaveExtensible) {
        if (size < 40) throw ParseError("truncated extensible 'fmt ' chunk at byte " + std::to_string(chunk_at), chunk_at);
        r.u16();  // cbSize
        r.u16();  // valid bits
        r.u32();  // channel mask
        format = r.u16();  // first two bytes of the sub-format GUID
      }
      r.seek(body + size + (size & 1u));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw ParseError("'data' chunk before 'fmt ' chunk at byte " + std::to_string(chunk_at), chunk_at);
      const std::size_t available = std::min<std::size_t>(size, r.remaining());
      if (available < size) {
        throw ParseError("truncated 'data' chunk at byte " + std::to_string(chunk_at) + ": header declares " +
                             std::to_string(size) + " bytes, " + std::to_string(available) + " present",
                         chunk_at);
      }
      data = r.bytes(size);
      have_data = true;
    } else {
      if (!r.has(size)) throw ParseError("truncated '" + std::string(id) + "' chunk at byte " + std::to_string(chunk_at), chunk_at);
      r.seek(r.offset() + size + (size & 1u));
    }
  }
  if (!have_fmt) throw ParseError("missing 'fmt ' chunk", r.offset());
  if (!have_data) throw ParseError("missing 'data' chunk", r.offset());

  const bool pcm16 = format == kWavePcm && bits == 16;
  const bool float32 = format == kWaveFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw UnsupportedFormat("unsupported WAV codec (format tag " + std::to_string(format) + ", " +
                            std::to_string(bits) + " bits); expected 16-bit PCM or 32-bit float");
  }
  if (channels != 1 && channels != 2) {
    throw UnsupportedFormat("unsupported channel count " + std::to_string(channels) + " (mono or stereo only)");
  }
  if (rate == 0) throw ParseError("sample rate is zero in 'fmt ' chunk", 0);
  const std::size_t bytes_per_sample = bits / 8u;
  if (block_align != channels * bytes_per_sample) {
    throw ParseError("inconsistent block alignment in 'fmt ' chunk", 0);
  }
  const std::size_t frames = data.size() / block_align;

  dsp::AudioClip clip;
  clip.sample_rate_hz = static_cast<double>(rate);
  clip.samples.resize(frames);
  ByteReader d(data);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      if (pcm16) {
        acc += static_cast<double>(static_cast<std::int16_t>(d.u16())) / 32768.0;
      } else {
        const float f = std::bit_cast<float>(d.u32());
        acc += std::clamp(static_cast<double>(f), -1.0, 1.0);
      }
    }
    clip.samples[i] = acc / channels;
  }
  return clip;
}

dsp::AudioClip load_wav(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_wav(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.position());
  }
}

std::vector<std::uint8_t> encode_wav(const dsp::AudioClip& clip) {
  if (!(clip.sample_rate_hz > 0.0) || clip.sample_rate_hz != std::round(clip.sample_rate_hz)) {
    throw InvalidArgument("save_wav: sample rate must be a positive integer");
  }
  const auto rate = static_cast<std::uint32_t>(clip.sample_rate_hz);
  const auto data_bytes = checked_u32(clip.size() * 2, "WAV data size");
  ByteWriter w;
  w.reserve(44 + data_bytes);
  w.raw("RIFF");
  w.u32(36 + data_bytes);
  w.raw("WAVE");
  w.raw("fmt ");
  w.u32(16);
  w.u16(kWavePcm);
  w.u16(1);
  w.u32(rate);
  w.u32(rate * 2);
  w.u16(2);
  w.u16(16);
  w.raw("data");
  w.u32(data_bytes);
  for (const double s : clip.samples) {
    const double v = std::isfinite(s) ? std::clamp(s, -1.0, 1.0) : 0.0;
    const long q = std::lround(v * 32768.0);
    w.i16(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L)));
  }
  return w.take();
}

void save_wav(const std::filesystem::path& path, const dsp::AudioClip& clip) { write_file(path, encode_wav(clip)); }

// ---- pitch contours ------------------------------------------------------

annotation::PitchContour parse_pitch_text(const std::string& text, std::optional<double> frame_period_sec) {
  if (frame_period_sec && !(*frame_period_sec > 0.0)) {
    throw InvalidArgument("frame period must be positive");
  }
  std::vector<annotation::PitchPoint> points;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    annotation::PitchPoint p;
    if (frame_period_sec) {
      if (!parse_double(line, p.f0_hz)) {
        throw ParseError("line " + std::to_string(line_no) + ": expected a single f0 value", line_no);
      }
      p.time_sec = static_cast<double>(points.size()) * *frame_period_sec;
    } else {
      const auto comma = line.find(',');
      if (comma == std::string_view::npos) {
        throw ParseError("line " + std::to_string(line_no) + ": expected 'time_sec,f0_hz'", line_no);
      }
      const bool ok = parse_double(line.substr(0, comma), p.time_sec) && parse_double(line.substr(comma + 1), p.f0_hz);
      if (!ok) {
        if (points.empty() && line_no == 1 && trim(line.substr(0, comma)) == "time_sec" &&
            trim(line.substr(comma + 1)) == "f0_hz") {
          continue;  // header
        }
        throw ParseError("line " + std::to_string(line_no) + ": malformed record '" + std::string(line) + "'", line_no);
      }
    }
    if (p.f0_hz < 0.0) {
      throw ParseError("line " + std::to_string(line_no) + ": negative f0", line_no);
    }
    points.push_back(p);
    std::string reason;
    const auto bad = annotation::find_contour_violation(points, &reason);
    if (bad != points.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": " + reason, line_no);
    }
  }
  if (points.empty()) {
    throw ParseError("pitch file contains no records", line_no);
  }
  return annotation::PitchContour(std::move(points));
}

annotation::PitchContour parse_pitch(const std::filesystem::path& path, std::optional<double> frame_period_sec) {
  const auto bytes = read_file(path);
  try {
    return parse_pitch_text(std::string(bytes.begin(), bytes.end()), frame_period_sec);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.position());
  }
}

std::string format_pitch(const annotation::PitchContour& contour) {
  std::string out = "time_sec,f0_hz\n";
  for (const auto& p : contour.points()) {
    out += format_double(p.time_sec);
    out += ',';
    out += format_double(p.f0_hz);
    out += '\n';
  }
  return out;
}

void write_pitch(const std::filesystem::path& path, const annotation::PitchContour& contour) {
  const std::string text = format_pitch(contour);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---- dictionaries --------------------------------------------------------

std::vector<std::uint8_t> encode_dict(const nnsc::Dictionary& dict) {
  require_real_matrix(dict.atoms, "dictionary atoms");
  if ((dict.atoms.array() < 0.0).any()) throw InvalidArgument("save_dict: dictionary has negative entries");
  const auto m = static_cast<std::size_t>(dict.bins());
  const auto k = static_cast<std::size_t>(dict.size());
  ByteWriter w;
  w.reserve(8 + 24 + m * k * 8);
  w.raw(std::string_view(kDictMagic, sizeof kDictMagic));
  w.u32(checked_u32(m, "bin count"));
  w.u32(checked_u32(k, "atom count"));
  w.u32(checked_u32(dict.fft_size, "fft size"));
  w.f64(dict.sample_rate_hz);
  if (dict.groups) {
    if (dict.groups->total() != k) throw InvalidArgument("save_dict: group sizes do not sum to the atom count");
    w.u32(checked_u32(dict.groups->count(), "group count"));
    for (const auto b : dict.groups->block_sizes) w.u32(checked_u32(b, "group size"));
  } else {
    w.u32(0);
  }
  const double* data = dict.atoms.data();  // column-major: atom-contiguous
  for (std::size_t i = 0; i < m * k; ++i) w.f64(data[i]);
  return w.take();
}

void save_dict(const std::filesystem::path& path, const nnsc::Dictionary& dict) { write_file(path, encode_dict(dict)); }

nnsc::Dictionary decode_dict(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kDictMagic || std::memcmp(bytes.data(), kDictMagic, sizeof kDictMagic) != 0) {
    throw FormatError("not a dictionary file: bad magic bytes (expected \"GSDICT1\\n\")");
  }
  ByteReader r(bytes);
  r.seek(sizeof kDictMagic);
  constexpr std::size_t kFixedHeader = 4 + 4 + 4 + 8 + 4;
  if (!r.has(kFixedHeader)) {
    throw CorruptionError("dictionary header truncated: " + std::to_string(bytes.size()) + " bytes");
  }
  const std::uint32_t m = r.u32();
  const std::uint32_t k = r.u32();
  const std::uint32_t fft_size = r.u32();
  const double rate = r.f64();
  const std::uint32_t kappa = r.u32();
  if (m == 0 || k == 0) throw FormatError("dictionary header declares an empty matrix");
  if (!(rate > 0.0) || !std::isfinite(rate)) throw FormatError("dictionary header has an invalid sample rate");
  if (fft_size == 0) throw FormatError("dictionary header has zero fft size");

  const std::uint64_t expected = sizeof kDictMagic + kFixedHeader + 4ull * kappa + 8ull * m * k;
  if (bytes.size() != expected) {
    throw CorruptionError("dictionary length mismatch: header implies " + std::to_string(expected) + " bytes, file has " +
                          std::to_string(bytes.size()));
  }

  nnsc::Dictionary dict;
  dict.sample_rate_hz = rate;
  dict.fft_size = fft_size;
  if (kappa > 0) {
    GroupPartition groups;
    for (std::uint32_t g = 0; g < kappa; ++g) {
      const std::uint32_t size = r.u32();
      if (size == 0) throw CorruptionError("dictionary group " + std::to_string(g) + " is empty");
      groups.block_sizes.push_back(size);
    }
    if (groups.total() != k) {
      throw CorruptionError("dictionary group sizes sum to " + std::to_string(groups.total()) + ", expected " +
                            std::to_string(k));
    }
    dict.groups = std::move(groups);
  }
  dict.atoms.resize(m, k);
  double* data = dict.atoms.data();
  for (std::uint64_t i = 0; i < 1ull * m * k; ++i) {
    const double v = r.f64();
    if (!std::isfinite(v)) throw CorruptionError("dictionary entry " + std::to_string(i) + " is not finite");
    if (v < 0.0) throw FormatError("dictionary entry " + std::to_string(i) + " is negative");
    data[i] = v;
  }
  return dict;
}

nnsc::Dictionary load_dict(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_dict(bytes);
}

}  // namespace gsrsep::io
