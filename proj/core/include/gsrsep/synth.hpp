#pragma once

#include "gsrsep/annotation.hpp"
#include "gsrsep/common.hpp"
#include "gsrsep/dsp.hpp"
#include "gsrsep/ialm.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gsrsep::synth {

/// X = D·Z_true + E_true with a known row support of Z_true.
struct SynthInstance {
  Matrix X;
  Matrix D;
  Matrix Z_true;
  Matrix E_true;
  std::vector<Eigen::Index> active_rows;  // sorted
  std::uint64_t seed = 0;
};

/// Non-negative unit-norm D (m×k); `active` uniformly chosen non-zero rows
/// of Z_true; E_true non-negative with round(e_density·m·n) non-zeros,
/// scaled so that 20·log10(‖D·Z_true‖/‖E_true‖) = snr_db.
SynthInstance gen_group_sparse(std::size_t m, std::size_t n, std::size_t k, std::size_t active, double e_density,
                               double snr_db, std::uint64_t seed);

/// Names of the seven chord atoms, in row order.
const std::vector<const char*>& chord_names();

/// Seven harmonic-stack chord atoms (C, Dm, Em, F, G, Am, Bm♭5) on the
/// default 1411-point / 22050 Hz bin grid, activated by the C-G-F-G-C
/// time-atom matrix. E_true = 0.
SynthInstance gen_chord_fixture();

struct TimingRow {
  std::size_t n = 0;
  ialm::Method method = ialm::Method::gsr;
  double seconds_per_iter = 0.0;
  double total_seconds = 0.0;
  std::size_t iters = 0;
};

using TimingReport = std::vector<TimingRow>;

struct ScalingOptions {
  std::size_t iters = 50;
  /// Each point is solved this many times; the fastest run is reported.
  std::size_t repeats = 1;
};

/// Solves gen_group_sparse instances of growing width with the convergence
/// check disabled and records per-iteration wall time.
TimingReport run_scaling(ialm::Method method, std::size_t m, std::size_t k, const std::vector<std::size_t>& n_values,
                         std::uint64_t seed, const ScalingOptions& options = {});

struct AudioFixture {
  dsp::AudioClip mixture;
  dsp::AudioClip voice;
  dsp::AudioClip music;
  annotation::PitchContour contour;
  /// Instantaneous F₀ of the voice at every sample (0 where silent).
  std::vector<double> f0_track;
};

constexpr double kFixtureRateHz = 22050.0;
/// Contour points are spaced 441 samples (20 ms) apart.
constexpr std::size_t kContourHopSamples = 441;

/// Sustained chords from a small harmonic instrument bank plus a gliding
/// harmonic "voice", mixed at 0 dB.
AudioFixture gen_audio_fixture(double duration_sec, std::uint64_t seed);

/// Accompaniment-only rendering from the same instrument bank (a different
/// chord sequence), for dictionary training.
dsp::AudioClip gen_instrument_training(double duration_sec, std::uint64_t seed);

}  // namespace gsrsep::synth
