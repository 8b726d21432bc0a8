#pragma once

#include "gsrsep/common.hpp"

#include <cstddef>
#include <vector>

namespace gsrsep::ialm {
struct SeparationSolution;
}

namespace gsrsep::dsp {

struct AudioClip {
  std::vector<double> samples;
  double sample_rate_hz = 22050.0;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_sec() const noexcept { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

/// Throws InvalidArgument unless the clip is non-empty, finite and has a positive rate.
void require_valid_clip(const AudioClip& clip, const char* what);

/// Frame layout shared by a spectrogram and everything aligned to it.
/// Frame t is centred on sample t·hop of the original signal.
struct Framing {
  std::size_t window_len = 1411;
  std::size_t hop = 353;
  std::size_t fft_size = 1411;
  double sample_rate_hz = 22050.0;
  std::size_t num_frames = 0;
  std::size_t signal_length = 0;  // samples of the analysed clip

  std::size_t bins() const noexcept { return fft_size / 2 + 1; }
  double bin_hz(std::size_t b) const noexcept {
    return static_cast<double>(b) * sample_rate_hz / static_cast<double>(fft_size);
  }
  double frame_time_sec(std::size_t t) const noexcept {
    return static_cast<double>(t * hop) / sample_rate_hz;
  }
};

struct Spectrogram {
  Matrix magnitude;  // bins × frames, ≥ 0
  Matrix phase;      // radians, same shape
  Framing framing;
};

constexpr std::size_t kDefaultWindow = 1411;
constexpr double kDefaultOverlap = 0.75;

/// Halves the sample rate: windowed-sinc low-pass just below the output
/// Nyquist frequency, then keep every second sample.
AudioClip resample_half(const AudioClip& clip, double target_rate_hz);

/// Periodic Hann window of the given length.
std::vector<double> hann_window(std::size_t length);

/// Hop used for a window/overlap pair: round(window·(1 − overlap)).
std::size_t hop_for(std::size_t window_len, double overlap);

/// One-sided STFT with a periodic Hann window and fft_size = window_len.
/// The signal is zero-padded by window_len/2 on both sides so that every
/// sample is covered by full overlap.
Spectrogram stft(const AudioClip& clip, std::size_t window_len = kDefaultWindow, double overlap = kDefaultOverlap);

/// Weighted overlap-add inverse with least-squares (Σw²) normalization,
/// trimmed to framing.signal_length samples.
AudioClip istft(const Spectrogram& spec);

/// istft of an arbitrary magnitude matrix combined with a reference phase.
AudioClip istft(const Matrix& magnitude, const Matrix& phase, const Framing& framing);

/// Σ_t w²(n − t·hop) over the padded signal, i.e. the synthesis normalizer.
std::vector<double> squared_window_sum(const Framing& framing);

struct SeparatedSources {
  AudioClip voice;
  AudioClip music;
};

struct ReconstructionOptions {
  /// Replace clamped magnitudes by X·Ê/(Ê + Â) and X·Â/(Ê + Â).
  bool ratio_mask = false;
};

/// voice = istft(max(E,0)·e^{iP}), music = istft(max(A,0)·e^{iP}).
SeparatedSources reconstruct_sources(const ialm::SeparationSolution& solution, const Spectrogram& spec,
                                     const ReconstructionOptions& options = {});

/// Same as above from bare magnitude matrices.
SeparatedSources reconstruct_sources(const Matrix& vocal_magnitude, const Matrix& music_magnitude,
                                     const Spectrogram& spec, const ReconstructionOptions& options = {});

}  // namespace gsrsep::dsp
