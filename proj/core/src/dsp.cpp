#include "gsrsep/dsp.hpp"

#include "gsrsep/ialm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace gsrsep::dsp {
namespace {

constexpr std::size_t kResampleHalfTaps = 80;  // one-sided length; filter has 2·80+1 taps
constexpr double kResampleKaiserBeta = 8.0;
constexpr double kResampleCutoff = 0.9;  // fraction of the output Nyquist frequency

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* plan) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        time_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        freq_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(fftw_planner_mutex());
    const int size = static_cast<int>(n);
    forward_.reset(fftw_plan_dft_r2c_1d(size, time_.get(), freq_.get(), FFTW_ESTIMATE));
    inverse_.reset(fftw_plan_dft_c2r_1d(size, freq_.get(), time_.get(), FFTW_ESTIMATE));
    if (!forward_ || !inverse_) {
      throw NumericalError("FFTW failed to create a plan of size " + std::to_string(n));
    }
  }

  double* time() noexcept { return time_.get(); }
  std::complex<double>* freq() noexcept { return reinterpret_cast<std::complex<double>*>(freq_.get()); }
  void forward() { fftw_execute(forward_.get()); }
  // unnormalized: the result is n times the true inverse
  void inverse() { fftw_execute(inverse_.get()); }
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwFree> time_;
  std::unique_ptr<fftw_complex, FftwFree> freq_;
  FftwPlan forward_;
  FftwPlan inverse_;
};

double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double half = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

std::vector<double> half_band_lowpass() {
  const std::size_t len = 2 * kResampleHalfTaps + 1;
  // cutoff in cycles per input sample: output Nyquist is a quarter of the input rate
  const double fc = 0.25 * kResampleCutoff;
  std::vector<double> h(len);
  const double denom = bessel_i0(kResampleKaiserBeta);
  double sum = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(kResampleHalfTaps);
    const double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
    const double r = t / static_cast<double>(kResampleHalfTaps);
    const double kaiser = bessel_i0(kResampleKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
    h[i] = sinc * kaiser;
    sum += h[i];
  }
  for (auto& v : h) v /= sum;  // unit DC gain
  return h;
}

std::size_t pad_for(const Framing& f) { return f.window_len / 2; }

std::size_t frames_for(std::size_t length, std::size_t window, std::size_t hop) {
  const std::size_t padded = length + 2 * (window / 2);
  if (padded <= window) return 1;
  return 1 + (padded - window + hop - 1) / hop;
}

void require_framing(const Framing& f, Eigen::Index rows, Eigen::Index cols) {
  if (f.window_len == 0 || f.hop == 0 || f.hop > f.window_len || f.fft_size != f.window_len) {
    throw InvalidArgument("istft: inconsistent framing (window " + std::to_string(f.window_len) + ", hop " +
                          std::to_string(f.hop) + ", fft " + std::to_string(f.fft_size) + ")");
  }
  if (static_cast<std::size_t>(rows) != f.bins() || static_cast<std::size_t>(cols) != f.num_frames) {
    throw InvalidArgument("istft: spectrogram shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " does not match framing (" + std::to_string(f.bins()) + " bins, " +
                          std::to_string(f.num_frames) + " frames)");
  }
  if (f.num_frames != frames_for(f.signal_length, f.window_len, f.hop)) {
    throw InvalidArgument("istft: frame count does not match recorded signal length");
  }
  if (!(f.sample_rate_hz > 0.0)) {
    throw InvalidArgument("istft: sample rate must be positive");
  }
}

}  // namespace

void require_valid_clip(const AudioClip& clip, const char* what) {
  if (clip.samples.empty()) {
    throw InvalidArgument(std::string(what) + ": audio clip is empty");
  }
  if (!(clip.sample_rate_hz > 0.0) || !std::isfinite(clip.sample_rate_hz)) {
    throw InvalidArgument(std::string(what) + ": sample rate must be positive");
  }
  for (const double s : clip.samples) {
    if (!std::isfinite(s)) {
      throw InvalidArgument(std::string(what) + ": audio clip contains non-finite samples");
    }
  }
}

AudioClip resample_half(const AudioClip& clip, double target_rate_hz) {
  require_valid_clip(clip, "resample_half");
  if (clip.sample_rate_hz != 2.0 * target_rate_hz) {
    throw InvalidArgument("resample_half: input rate " + std::to_string(clip.sample_rate_hz) +
                          " Hz is not exactly twice the target " + std::to_string(target_rate_hz) + " Hz");
  }
  static const std::vector<double> taps = half_band_lowpass();
  const auto n = static_cast<std::ptrdiff_t>(clip.size());
  const auto half = static_cast<std::ptrdiff_t>(kResampleHalfTaps);
  AudioClip out;
  out.sample_rate_hz = target_rate_hz;
  out.samples.resize(clip.size() / 2 + clip.size() % 2);
  for (std::size_t o = 0; o < out.samples.size(); ++o) {
    const auto centre = static_cast<std::ptrdiff_t>(2 * o);
    double acc = 0.0;
    for (std::ptrdiff_t j = -half; j <= half; ++j) {
      const std::ptrdiff_t idx = centre - j;
      if (idx >= 0 && idx < n) {
        acc += taps[static_cast<std::size_t>(j + half)] * clip.samples[static_cast<std::size_t>(idx)];
      }
    }
    out.samples[o] = acc;
  }
  return out;
}

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t i = 0; i < length; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(length));
  }
  return w;
}

std::size_t hop_for(std::size_t window_len, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw InvalidArgument("overlap must lie in [0, 1)");
  }
  const auto hop = static_cast<std::size_t>(std::lround(static_cast<double>(window_len) * (1.0 - overlap)));
  return std::max<std::size_t>(hop, 1);
}

Spectrogram stft(const AudioClip& clip, std::size_t window_len, double overlap) {
  require_valid_clip(clip, "stft");
  if (window_len < 2) {
    throw InvalidArgument("stft: window length must be at least 2");
  }
  if (clip.size() < window_len) {
    throw InvalidArgument("stft: clip has " + std::to_string(clip.size()) + " samples, shorter than the " +
                          std::to_string(window_len) + "-sample window");
  }
  Framing f;
  f.window_len = window_len;
  f.fft_size = window_len;
  f.hop = hop_for(window_len, overlap);
  f.sample_rate_hz = clip.sample_rate_hz;
  f.signal_length = clip.size();
  f.num_frames = frames_for(clip.size(), window_len, f.hop);

  const auto window = hann_window(window_len);
  const std::size_t pad = pad_for(f);
  const auto bins = static_cast<Eigen::Index>(f.bins());
  const auto frames = static_cast<Eigen::Index>(f.num_frames);

  Spectrogram spec;
  spec.framing = f;
  spec.magnitude.resize(bins, frames);
  spec.phase.resize(bins, frames);

  RealFft fft(window_len);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * f.hop;  // in padded coordinates
    double* buf = fft.time();
    for (std::size_t i = 0; i < window_len; ++i) {
      const std::size_t padded_idx = start + i;
      double s = 0.0;
      if (padded_idx >= pad && padded_idx - pad < clip.size()) {
        s = clip.samples[padded_idx - pad];
      }
      buf[i] = s * window[i];
    }
    fft.forward();
    const std::complex<double>* spectrum = fft.freq();
    for (Eigen::Index b = 0; b < bins; ++b) {
      spec.magnitude(b, t) = std::abs(spectrum[b]);
      spec.phase(b, t) = std::arg(spectrum[b]);
    }
  }
  return spec;
}

std::vector<double> squared_window_sum(const Framing& f) {
  const auto window = hann_window(f.window_len);
  const std::size_t padded = (f.num_frames - 1) * f.hop + f.window_len;
  std::vector<double> sum(padded, 0.0);
  for (std::size_t t = 0; t < f.num_frames; ++t) {
    for (std::size_t i = 0; i < f.window_len; ++i) {
      sum[t * f.hop + i] += window[i] * window[i];
    }
  }
  return sum;
}

AudioClip istft(const Matrix& magnitude, const Matrix& phase, const Framing& f) {
  require_same_shape(magnitude, phase, "istft magnitude vs phase");
  require_framing(f, magnitude.rows(), magnitude.cols());

  const auto window = hann_window(f.window_len);
  const auto norm = squared_window_sum(f);
  std::vector<double> acc(norm.size(), 0.0);
  const auto bins = magnitude.rows();
  const double inv_n = 1.0 / static_cast<double>(f.fft_size);

  RealFft fft(f.fft_size);
  for (std::size_t t = 0; t < f.num_frames; ++t) {
    std::complex<double>* spectrum = fft.freq();
    const auto col = static_cast<Eigen::Index>(t);
    for (Eigen::Index b = 0; b < bins; ++b) {
      spectrum[b] = std::polar(magnitude(b, col), phase(b, col));
    }
    // a real signal has real DC (and Nyquist, for even sizes)
    spectrum[0] = {spectrum[0].real(), 0.0};
    if (f.fft_size % 2 == 0) {
      spectrum[bins - 1] = {spectrum[bins - 1].real(), 0.0};
    }
    fft.inverse();
    const double* frame = fft.time();
    const std::size_t start = t * f.hop;
    for (std::size_t i = 0; i < f.window_len; ++i) {
      acc[start + i] += frame[i] * inv_n * window[i];
    }
  }

  const std::size_t pad = pad_for(f);
  AudioClip out;
  out.sample_rate_hz = f.sample_rate_hz;
  out.samples.resize(f.signal_length);
  for (std::size_t i = 0; i < f.signal_length; ++i) {
    const double w = norm[i + pad];
    out.samples[i] = w > 1e-12 ? acc[i + pad] / w : 0.0;
  }
  return out;
}

AudioClip istft(const Spectrogram& spec) {
  require_same_shape(spec.magnitude, spec.phase, "istft magnitude vs phase");
  return istft(spec.magnitude, spec.phase, spec.framing);
}

SeparatedSources reconstruct_sources(const Matrix& vocal_magnitude, const Matrix& music_magnitude,
                                     const Spectrogram& spec, const ReconstructionOptions& options) {
  require_same_shape(vocal_magnitude, spec.magnitude, "reconstruct_sources E vs spectrogram");
  require_same_shape(music_magnitude, spec.magnitude, "reconstruct_sources A vs spectrogram");
  Matrix voice = vocal_magnitude.cwiseMax(0.0);
  Matrix music = music_magnitude.cwiseMax(0.0);
  if (options.ratio_mask) {
    const Matrix total = voice + music;
    for (Eigen::Index j = 0; j < total.cols(); ++j) {
      for (Eigen::Index i = 0; i < total.rows(); ++i) {
        const double denom = total(i, j);
        const double x = spec.magnitude(i, j);
        if (denom > 0.0) {
          voice(i, j) = x * voice(i, j) / denom;
          music(i, j) = x * music(i, j) / denom;
        } else {
          voice(i, j) = 0.5 * x;
          music(i, j) = 0.5 * x;
        }
      }
    }
  }
  return SeparatedSources{
      .voice = istft(voice, spec.phase, spec.framing),
      .music = istft(music, spec.phase, spec.framing),
  };
}

SeparatedSources reconstruct_sources(const ialm::SeparationSolution& solution, const Spectrogram& spec,
                                     const ReconstructionOptions& options) {
  return reconstruct_sources(solution.E, solution.A, spec, options);
}

}  // namespace gsrsep::dsp
