#include "gsrsep/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>

namespace gsrsep {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("gsrsep_io_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// Minimal RIFF writer kept separate from the library encoder.
struct WavBuilder {
  std::vector<std::uint8_t> bytes;
  void raw(const char* s) { bytes.insert(bytes.end(), s, s + 4); }
  void u16(std::uint16_t v) {
    bytes.push_back(static_cast<std::uint8_t>(v & 0xFF));
    bytes.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
  void f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u32(u);
  }

  static WavBuilder header(std::uint16_t format, std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                           std::uint32_t data_bytes) {
    WavBuilder w;
    w.raw("RIFF");
    w.u32(36 + data_bytes);
    w.raw("WAVE");
    w.raw("fmt ");
    w.u32(16);
    w.u16(format);
    w.u16(channels);
    w.u32(rate);
    w.u32(rate * channels * bits / 8);
    w.u16(static_cast<std::uint16_t>(channels * bits / 8));
    w.u16(bits);
    w.raw("data");
    w.u32(data_bytes);
    return w;
  }
};

dsp::AudioClip random_clip(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  dsp::AudioClip c;
  c.samples.resize(n);
  for (auto& s : c.samples) s = dist(rng);
  return c;
}

TEST(Wav, RoundTripWithinQuantization) {
  TempDir dir;
  const auto clip = random_clip(5000, 1);
  io::save_wav(dir / "a.wav", clip);
  const auto back = io::load_wav(dir / "a.wav");
  EXPECT_EQ(back.sample_rate_hz, 22050.0);
  ASSERT_EQ(back.size(), clip.size());
  for (std::size_t i = 0; i < clip.size(); ++i) ASSERT_LE(std::abs(back.samples[i] - clip.samples[i]), 1.0 / 32768.0);
}

TEST(Wav, StereoIsAveraged) {
  const std::vector<std::int16_t> left = {1000, -2000, 32767, 5};
  auto w = WavBuilder::header(1, 2, 44100, 16, static_cast<std::uint32_t>(left.size() * 4));
  for (auto v : left) {
    w.u16(static_cast<std::uint16_t>(v));
    w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(-v)));
  }
  const auto clip = io::parse_wav(w.bytes);
  EXPECT_EQ(clip.sample_rate_hz, 44100.0);
  ASSERT_EQ(clip.size(), left.size());
  for (double s : clip.samples) EXPECT_EQ(s, 0.0);
}

TEST(Wav, ReadsFloat32) {
  const std::vector<float> values = {0.25f, -0.5f, 0.125f};
  auto w = WavBuilder::header(3, 1, 22050, 32, 12);
  for (float v : values) w.f32(v);
  const auto clip = io::parse_wav(w.bytes);
  ASSERT_EQ(clip.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(clip.samples[i], static_cast<double>(values[i]));
}

TEST(Wav, EncoderWritesPcm16Header) {
  dsp::AudioClip c;
  c.samples = {0.5, -1.0};
  const auto bytes = io::encode_wav(c);
  ASSERT_EQ(bytes.size(), 48u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RIFF");
  EXPECT_EQ(bytes[20], 1);  // PCM
  EXPECT_EQ(bytes[34], 16);
  EXPECT_EQ(bytes[44] | (bytes[45] << 8), 16384);
}

TEST(Wav, TruncatedHeaderNamesChunk) {
  const auto full = io::encode_wav(random_clip(10, 2));
  try {
    io::parse_wav(std::span(full.data(), 30));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("'fmt '"), std::string::npos) << e.what();
    EXPECT_EQ(e.position(), 12u);
  }
  try {
    io::parse_wav(std::span(full.data(), 36));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("'data'"), std::string::npos) << e.what();
  }
  try {
    io::parse_wav(std::span(full.data(), 8));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("'RIFF'"), std::string::npos) << e.what();
  }
}

TEST(Wav, RejectsUnsupportedCodec) {
  auto adpcm = WavBuilder::header(2, 1, 22050, 4, 4);
  adpcm.u32(0);
  EXPECT_THROW(io::parse_wav(adpcm.bytes), UnsupportedFormat);
  auto pcm24 = WavBuilder::header(1, 1, 22050, 24, 6);
  pcm24.u32(0);
  pcm24.u16(0);
  EXPECT_THROW(io::parse_wav(pcm24.bytes), UnsupportedFormat);
  auto surround = WavBuilder::header(1, 6, 22050, 16, 12);
  for (int i = 0; i < 6; ++i) surround.u16(0);
  EXPECT_THROW(io::parse_wav(surround.bytes), UnsupportedFormat);
}

TEST(Wav, MissingFileIsIoError) { EXPECT_THROW(io::load_wav("/nonexistent/dir/x.wav"), IoError); }

TEST(Pitch, TwoLineFile) {
  const auto c = io::parse_pitch_text("0.0,220.0\n0.032,0.0\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points()[0], (annotation::PitchPoint{0.0, 220.0}));
  EXPECT_EQ(c.points()[1], (annotation::PitchPoint{0.032, 0.0}));
}

TEST(Pitch, HeaderIsOptional) {
  EXPECT_EQ(io::parse_pitch_text("time_sec,f0_hz\n0.0,220.0\n0.032,0.0\n"),
            io::parse_pitch_text("0.0,220.0\n0.032,0.0\n"));
}

TEST(Pitch, FramePeriodVariant) {
  const auto c = io::parse_pitch_text("0\n220\n221.5\n0\n", 0.03125);
  ASSERT_EQ(c.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(c.points()[i].time_sec, 0.03125 * static_cast<double>(i));
  EXPECT_EQ(c.points()[2].f0_hz, 221.5);
}

TEST(Pitch, EmptyFileRejected) {
  EXPECT_THROW(io::parse_pitch_text(""), ParseError);
  EXPECT_THROW(io::parse_pitch_text("time_sec,f0_hz\n"), ParseError);
}

TEST(Pitch, ErrorsCarryLineNumbers) {
  try {
    io::parse_pitch_text("0.0,220\n0.1,220\n0.05,220\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 3u);
  }
  try {
    io::parse_pitch_text("0.0,220\n0.1,-5\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 2u);
  }
  EXPECT_THROW(io::parse_pitch_text("0.0;220\n"), ParseError);
  EXPECT_THROW(io::parse_pitch_text("0.0,abc\n"), ParseError);
}

TEST(Pitch, RoundTripIsExact) {
  TempDir dir;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> f0(40.0, 2000.0);
  std::vector<annotation::PitchPoint> pts;
  double t = 0.0;
  for (int i = 0; i < 300; ++i) {
    pts.push_back({t, i % 7 == 0 ? 0.0 : f0(rng)});
    t += 0.01 + 1e-7 * static_cast<double>(rng() % 1000);
  }
  const annotation::PitchContour c(pts);
  io::write_pitch(dir / "p.csv", c);
  EXPECT_EQ(io::parse_pitch(dir / "p.csv"), c);
}

nnsc::Dictionary random_dict(Eigen::Index m, Eigen::Index k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  nnsc::Dictionary d;
  d.atoms.resize(m, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < m; ++i) d.atoms(i, j) = dist(rng);
  return d;
}

TEST(Dict, BitwiseRoundTrip) {
  TempDir dir;
  const auto d = random_dict(706, 100, 4);
  io::save_dict(dir / "d.gsd", d);
  const auto back = io::load_dict(dir / "d.gsd");
  EXPECT_EQ(std::memcmp(back.atoms.data(), d.atoms.data(), sizeof(double) * 70600), 0);
  EXPECT_EQ(back.sample_rate_hz, 22050.0);
  EXPECT_EQ(back.fft_size, 1411u);
  EXPECT_FALSE(back.groups.has_value());
  EXPECT_EQ(io::encode_dict(back), io::encode_dict(d));
}

TEST(Dict, GroupsSurviveRoundTrip) {
  auto d = random_dict(20, 300, 5);
  d.groups = GroupPartition{{100, 100, 100}};
  const auto back = io::decode_dict(io::encode_dict(d));
  ASSERT_TRUE(back.groups.has_value());
  EXPECT_EQ(back.groups->block_sizes, (std::vector<std::size_t>{100, 100, 100}));
  EXPECT_EQ(back.atoms, d.atoms);
}

TEST(Dict, LayoutIsLittleEndianColumnMajor) {
  nnsc::Dictionary d;
  d.atoms.resize(2, 2);
  d.atoms << 1.0, 3.0, 2.0, 4.0;
  const auto bytes = io::encode_dict(d);
  ASSERT_EQ(bytes.size(), 8u + 12u + 8u + 4u + 32u);
  EXPECT_EQ(std::memcmp(bytes.data(), "GSDICT1\n", 8), 0);
  EXPECT_EQ(bytes[8], 2);
  EXPECT_EQ(bytes[12], 2);
  EXPECT_EQ(bytes[16] | (bytes[17] << 8), 1411);
  double second;
  std::memcpy(&second, bytes.data() + 32 + 8, 8);
  EXPECT_EQ(second, 2.0);
}

TEST(Dict, RejectsCorruptFiles) {
  const auto good = io::encode_dict(random_dict(5, 3, 6));
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(io::decode_dict(bad_magic), FormatError);
  auto short_file = good;
  short_file.pop_back();
  EXPECT_THROW(io::decode_dict(short_file), CorruptionError);
  auto long_file = good;
  long_file.push_back(0);
  EXPECT_THROW(io::decode_dict(long_file), CorruptionError);
  EXPECT_THROW(io::decode_dict(std::span(good.data(), 10)), CorruptionError);
  auto negative = good;
  const double minus = -0.5;
  std::memcpy(negative.data() + 32, &minus, 8);
  EXPECT_THROW(io::decode_dict(negative), FormatError);
}

TEST(Dict, RefusesToWriteNegativeEntries) {
  auto d = random_dict(3, 2, 7);
  d.atoms(1, 1) = -1.0;
  EXPECT_THROW(io::encode_dict(d), InvalidArgument);
}

}  // namespace
}  // namespace gsrsep
