#include "gsrsep/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace gsrsep::synth {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Semitone offsets from C of the triads C, Dm, Em, F, G, Am, Bdim.
constexpr std::array<std::array<int, 3>, 7> kTriads = {{
    {0, 4, 7},
    {2, 5, 9},
    {4, 7, 11},
    {5, 9, 12},
    {7, 11, 14},
    {9, 12, 16},
    {11, 14, 17},
}};

double note_hz(double c_hz, int semitone) { return c_hz * std::pow(2.0, semitone / 12.0); }

// Relative harmonic amplitudes of the accompaniment instruments.
struct Instrument {
  std::array<double, 12> harmonics;
};

const std::array<Instrument, 3>& instrument_bank() {
  static const std::array<Instrument, 3> bank = [] {
    std::array<Instrument, 3> b{};
    for (std::size_t h = 0; h < 12; ++h) {
      const double n = static_cast<double>(h + 1);
      b[0].harmonics[h] = 1.0 / n;                             // sawtooth-like
      b[1].harmonics[h] = (h % 2 == 0) ? 1.0 / n : 0.1 / n;    // clarinet-like, odd partials
      b[2].harmonics[h] = std::exp(-0.45 * static_cast<double>(h));  // mellow
    }
    return b;
  }();
  return bank;
}

double fade_envelope(double t, double length, double fade) {
  if (t < 0.0 || t > length) return 0.0;
  const double in = std::min(1.0, t / fade);
  const double out = std::min(1.0, (length - t) / fade);
  return std::min(in, out);
}

double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (const double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(std::max<std::size_t>(x.size(), 1)));
}

// Chord accompaniment: each chord lasts 0.8–1.4 s, each note is voiced by one
// of the bank instruments, chords cross-fade over 30 ms.
std::vector<double> render_accompaniment(std::size_t samples, double rate, std::mt19937_64& rng) {
  std::vector<double> out(samples, 0.0);
  std::uniform_int_distribution<int> chord_pick(0, 6);
  std::uniform_int_distribution<int> instrument_pick(0, 2);
  std::uniform_real_distribution<double> length_pick(0.8, 1.4);
  std::uniform_real_distribution<double> phase_pick(0.0, kTwoPi);
  const double c3 = 130.8128;
  const double duration = static_cast<double>(samples) / rate;
  const double nyquist = rate / 2.0;
  double start = 0.0;
  while (start < duration) {
    const double length = length_pick(rng);
    const auto& triad = kTriads[static_cast<std::size_t>(chord_pick(rng))];
    const auto first = static_cast<std::size_t>(start * rate);
    const auto last = std::min(samples, static_cast<std::size_t>((start + length) * rate) + 1);
    for (const int semitone : triad) {
      const double f0 = note_hz(c3, semitone);
      const auto& inst = instrument_bank()[static_cast<std::size_t>(instrument_pick(rng))];
      std::array<double, 12> phases{};
      for (auto& p : phases) p = phase_pick(rng);
      for (std::size_t i = first; i < last; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double env = fade_envelope(t - start, length, 0.03);
        double s = 0.0;
        for (std::size_t h = 0; h < inst.harmonics.size(); ++h) {
          const double fh = f0 * static_cast<double>(h + 1);
          if (fh >= nyquist) break;
          s += inst.harmonics[h] * std::sin(kTwoPi * fh * t + phases[h]);
        }
        out[i] += env * s;
      }
    }
    start += length;
  }
  return out;
}

}  // namespace

SynthInstance gen_group_sparse(std::size_t m, std::size_t n, std::size_t k, std::size_t active, double e_density,
                               double snr_db, std::uint64_t seed) {
  if (m == 0 || n == 0 || k == 0) {
    throw InvalidArgument("gen_group_sparse: m, n and k must be positive");
  }
  if (active > k) {
    throw InvalidArgument("gen_group_sparse: active rows (" + std::to_string(active) + ") exceed k (" +
                          std::to_string(k) + ")");
  }
  if (!(e_density >= 0.0 && e_density <= 1.0)) {
    throw InvalidArgument("gen_group_sparse: e_density must lie in [0, 1]");
  }
  if (!std::isfinite(snr_db)) {
    throw InvalidArgument("gen_group_sparse: snr_db must be finite");
  }
  const auto mi = static_cast<Eigen::Index>(m);
  const auto ni = static_cast<Eigen::Index>(n);
  const auto ki = static_cast<Eigen::Index>(k);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SynthInstance inst;
  inst.seed = seed;
  inst.D.resize(mi, ki);
  for (Eigen::Index j = 0; j < ki; ++j) {
    for (Eigen::Index i = 0; i < mi; ++i) inst.D(i, j) = unit(rng);
    inst.D.col(j) /= inst.D.col(j).norm();
  }

  std::vector<Eigen::Index> rows(k);
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(active);
  std::sort(rows.begin(), rows.end());
  inst.active_rows = rows;

  inst.Z_true = Matrix::Zero(ki, ni);
  for (const auto r : rows) {
    for (Eigen::Index j = 0; j < ni; ++j) inst.Z_true(r, j) = unit(rng);
  }

  inst.E_true = Matrix::Zero(mi, ni);
  const auto total = m * n;
  const auto nonzeros = static_cast<std::size_t>(std::llround(e_density * static_cast<double>(total)));
  if (nonzeros > 0) {
    std::vector<std::size_t> cells(total);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    std::shuffle(cells.begin(), cells.end(), rng);
    for (std::size_t c = 0; c < nonzeros; ++c) {
      inst.E_true(static_cast<Eigen::Index>(cells[c] % m), static_cast<Eigen::Index>(cells[c] / m)) =
          0.5 + unit(rng);
    }
  }

  const Matrix low_rank = inst.D * inst.Z_true;
  const double signal = low_rank.norm();
  const double noise = inst.E_true.norm();
  if (signal > 0.0 && noise > 0.0) {
    inst.E_true *= signal * std::pow(10.0, -snr_db / 20.0) / noise;
  }
  inst.X = low_rank + inst.E_true;
  return inst;
}

const std::vector<const char*>& chord_names() {
  static const std::vector<const char*> names = {"C", "Dm", "Em", "F", "G", "Am", "Bm(b5)"};
  return names;
}

SynthInstance gen_chord_fixture() {
  const dsp::Framing grid{};  // 1411-point frames at 22050 Hz
  const auto bins = static_cast<Eigen::Index>(grid.bins());
  const double c4 = 261.6256;
  const double max_partial_hz = 6000.0;
  // main-lobe spread of a Hann-windowed partial, in bins
  const double lobe_sigma_bins = 1.0;
  // atoms are expressed on a spectrogram magnitude scale
  const double atom_peak = 10.0;

  SynthInstance inst;
  inst.D = Matrix::Zero(bins, static_cast<Eigen::Index>(kTriads.size()));
  for (std::size_t c = 0; c < kTriads.size(); ++c) {
    auto atom = inst.D.col(static_cast<Eigen::Index>(c));
    for (const int semitone : kTriads[c]) {
      const double f0 = note_hz(c4, semitone);
      for (int h = 1; h * f0 <= max_partial_hz; ++h) {
        const double centre_bin = h * f0 / grid.bin_hz(1);
        for (Eigen::Index b = 0; b < bins; ++b) {
          const double d = (static_cast<double>(b) - centre_bin) / lobe_sigma_bins;
          if (std::abs(d) < 6.0) atom(b) += std::exp(-0.5 * d * d) / h;
        }
      }
    }
    atom *= atom_peak / atom.maxCoeff();
  }

  // C-G-F-G-C
  inst.Z_true = Matrix::Zero(7, 5);
  inst.Z_true(0, 0) = 1.0;
  inst.Z_true(4, 1) = 1.0;
  inst.Z_true(3, 2) = 1.0;
  inst.Z_true(4, 3) = 1.0;
  inst.Z_true(0, 4) = 1.0;
  inst.active_rows = {0, 3, 4};
  inst.E_true = Matrix::Zero(bins, 5);
  inst.X = inst.D * inst.Z_true;
  return inst;
}

TimingReport run_scaling(ialm::Method method, std::size_t m, std::size_t k, const std::vector<std::size_t>& n_values,
                         std::uint64_t seed, const ScalingOptions& options) {
  if (!std::is_sorted(n_values.begin(), n_values.end()) ||
      std::adjacent_find(n_values.begin(), n_values.end()) != n_values.end()) {
    throw InvalidArgument("run_scaling: n values must be strictly increasing");
  }
  if (options.iters == 0 || options.repeats == 0) {
    throw InvalidArgument("run_scaling: iters and repeats must be positive");
  }
  TimingReport report;
  for (const auto n : n_values) {
    const auto inst = gen_group_sparse(m, n, k, std::max<std::size_t>(1, k / 10), 0.02, 0.0, seed);
    ialm::ProblemSpec spec;
    spec.X = inst.X;
    spec.method = method;
    if (ialm::uses_dictionary(method)) spec.D = inst.D;
    if (ialm::is_informed(method)) spec.E0 = inst.E_true;
    auto cfg = ialm::default_config(m, n, method);
    cfg.max_iters = options.iters;
    cfg.check_convergence = false;

    TimingRow row;
    row.n = n;
    row.method = method;
    row.seconds_per_iter = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < options.repeats; ++r) {
      const auto sol = ialm::solve(spec, cfg);
      if (sol.seconds_per_iter() < row.seconds_per_iter) {
        row.seconds_per_iter = sol.seconds_per_iter();
        row.total_seconds = sol.wall_time.count();
        row.iters = sol.iters;
      }
    }
    report.push_back(row);
  }
  return report;
}

dsp::AudioClip gen_instrument_training(double duration_sec, std::uint64_t seed) {
  if (!(duration_sec > 0.0)) {
    throw InvalidArgument("gen_instrument_training: duration must be positive");
  }
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const auto samples = static_cast<std::size_t>(duration_sec * kFixtureRateHz);
  dsp::AudioClip clip;
  clip.sample_rate_hz = kFixtureRateHz;
  clip.samples = render_accompaniment(samples, kFixtureRateHz, rng);
  const double peak = std::abs(*std::max_element(clip.samples.begin(), clip.samples.end(),
                                                 [](double a, double b) { return std::abs(a) < std::abs(b); }));
  if (peak > 0.0) {
    for (auto& s : clip.samples) s *= 0.5 / peak;
  }
  return clip;
}

AudioFixture gen_audio_fixture(double duration_sec, std::uint64_t seed) {
  if (!(duration_sec >= 2.0)) {
    throw InvalidArgument("gen_audio_fixture: duration must be at least 2 s");
  }
  const double rate = kFixtureRateHz;
  const auto samples = static_cast<std::size_t>(duration_sec * rate);
  std::mt19937_64 rng(seed);

  AudioFixture fx;
  std::vector<double> music = render_accompaniment(samples, rate, rng);

  // voice: phrases of 0.6–1.2 s separated by 0.15–0.35 s rests; each phrase
  // glides between two in-key notes (C major, C4–C5) with 5.5 Hz vibrato
  std::uniform_real_distribution<double> phrase_pick(0.6, 1.2);
  std::uniform_real_distribution<double> rest_pick(0.15, 0.35);
  std::uniform_int_distribution<int> note_pick(0, 7);
  constexpr std::array<int, 8> kScale = {0, 2, 4, 5, 7, 9, 11, 12};
  const double c4 = 261.6256;

  struct Phrase {
    double start, length, from_hz, to_hz;
  };
  std::vector<Phrase> phrases;
  double t = rest_pick(rng);
  while (t < duration_sec - 0.3) {
    const double length = std::min(phrase_pick(rng), duration_sec - t);
    const double from = note_hz(c4, kScale[static_cast<std::size_t>(note_pick(rng))]);
    const double to = note_hz(c4, kScale[static_cast<std::size_t>(note_pick(rng))]);
    phrases.push_back({t, length, from, to});
    t += length + rest_pick(rng);
  }

  auto f0_at = [&](double time) {
    for (const auto& p : phrases) {
      if (time >= p.start && time < p.start + p.length) {
        const double u = (time - p.start) / p.length;
        const double glide = std::min(1.0, std::max(0.0, (u - 0.3) / 0.4));  // hold, glide, hold
        const double base = p.from_hz * std::pow(p.to_hz / p.from_hz, glide);
        return base * (1.0 + 0.015 * std::sin(kTwoPi * 5.5 * (time - p.start)));
      }
    }
    return 0.0;
  };

  constexpr std::array<double, 16> kVoiceHarmonics = {1.0, 0.7, 0.5, 0.55, 0.35, 0.2, 0.18, 0.12,
                                                      0.1, 0.07, 0.05, 0.04, 0.03, 0.02, 0.015, 0.01};
  std::vector<double> voice(samples, 0.0);
  fx.f0_track.assign(samples, 0.0);
  std::array<double, kVoiceHarmonics.size()> phase{};
  for (std::size_t i = 0; i < samples; ++i) {
    const double time = static_cast<double>(i) / rate;
    const double f0 = f0_at(time);
    fx.f0_track[i] = f0;
    if (f0 <= 0.0) {
      phase.fill(0.0);
      continue;
    }
    double env = 0.0;
    for (const auto& p : phrases) {
      if (time >= p.start && time < p.start + p.length) env = fade_envelope(time - p.start, p.length, 0.04);
    }
    double s = 0.0;
    for (std::size_t h = 0; h < kVoiceHarmonics.size(); ++h) {
      const double fh = f0 * static_cast<double>(h + 1);
      phase[h] = std::fmod(phase[h] + kTwoPi * fh / rate, kTwoPi);
      if (fh < rate / 2.0) s += kVoiceHarmonics[h] * std::sin(phase[h]);
    }
    voice[i] = env * s;
  }

  // 0 dB mix, then a common gain so the mixture peaks at 0.9
  const double music_rms = rms(music);
  const double voice_rms = rms(voice);
  if (music_rms > 0.0 && voice_rms > 0.0) {
    for (auto& v : voice) v *= music_rms / voice_rms;
  }
  std::vector<double> mix(samples);
  for (std::size_t i = 0; i < samples; ++i) mix[i] = voice[i] + music[i];
  double peak = 0.0;
  for (const double v : mix) peak = std::max(peak, std::abs(v));
  const double gain = peak > 0.0 ? 0.9 / peak : 1.0;
  for (std::size_t i = 0; i < samples; ++i) {
    voice[i] *= gain;
    music[i] *= gain;
    mix[i] = voice[i] + music[i];
  }

  fx.voice = {std::move(voice), rate};
  fx.music = {std::move(music), rate};
  fx.mixture = {std::move(mix), rate};

  std::vector<annotation::PitchPoint> points;
  for (std::size_t i = 0; i < samples; i += kContourHopSamples) {
    points.push_back({static_cast<double>(i) / rate, fx.f0_track[i]});
  }
  fx.contour = annotation::PitchContour(std::move(points));
  return fx;
}

}  // namespace gsrsep::synth
