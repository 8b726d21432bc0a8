#pragma once

#include "gsrsep/annotation.hpp"
#include "gsrsep/dsp.hpp"
#include "gsrsep/nnsc.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gsrsep::io {

/// Reads RIFF/WAVE PCM-16 or IEEE float-32, mono or stereo. Stereo is
/// averaged to mono. Samples are normalized to [−1, 1].
dsp::AudioClip load_wav(const std::filesystem::path& path);
dsp::AudioClip parse_wav(std::span<const std::uint8_t> bytes);

/// Writes mono 16-bit PCM without dither; samples are clipped to [−1, 1].
void save_wav(const std::filesystem::path& path, const dsp::AudioClip& clip);
std::vector<std::uint8_t> encode_wav(const dsp::AudioClip& clip);

/// `time_sec,f0_hz` CSV (header optional on input). When `frame_period_sec`
/// is given the file is instead read as one f0 value per line at times
/// 0, period, 2·period, …
annotation::PitchContour parse_pitch(const std::filesystem::path& path,
                                     std::optional<double> frame_period_sec = std::nullopt);
annotation::PitchContour parse_pitch_text(const std::string& text,
                                          std::optional<double> frame_period_sec = std::nullopt);

/// Writes the header plus one shortest-round-trip decimal record per line.
void write_pitch(const std::filesystem::path& path, const annotation::PitchContour& contour);
std::string format_pitch(const annotation::PitchContour& contour);

/// Binary dictionary file:
///   "GSDICT1\n" | u32 m | u32 k | u32 fft_size | f64 sample_rate_hz |
///   u32 κ | κ × u32 block size | m·k × f64 atoms, column-major.
/// All fields little-endian. κ = 0 means no group partition.
inline constexpr char kDictMagic[8] = {'G', 'S', 'D', 'I', 'C', 'T', '1', '\n'};

void save_dict(const std::filesystem::path& path, const nnsc::Dictionary& dict);
std::vector<std::uint8_t> encode_dict(const nnsc::Dictionary& dict);

/// Throws FormatError on bad magic or invalid header values and
/// CorruptionError when the byte length disagrees with the header.
nnsc::Dictionary load_dict(const std::filesystem::path& path);
nnsc::Dictionary decode_dict(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace gsrsep::io
