#pragma once

#include "gsrsep/dsp.hpp"

#include <cstddef>
#include <vector>

namespace gsrsep::metrics {

/// Reports replace ±∞ by ±kDbCap.
constexpr double kDbCap = 200.0;

struct Decomposition {
  std::vector<double> s_target;
  std::vector<double> e_interf;
  std::vector<double> e_artif;
};

struct DecomposeOptions {
  /// Number of delayed copies of each reference spanned by the projection.
  /// 1 is a time-invariant gain.
  std::size_t filter_length = 1;
};

/// Splits `estimate` into the projection onto span{target}, the additional
/// projection onto span{target, others}, and the remainder.
Decomposition decompose(const dsp::AudioClip& estimate, const dsp::AudioClip& target,
                        const std::vector<dsp::AudioClip>& others, const DecomposeOptions& options = {});

struct Ratios {
  double sdr_db = 0.0;
  double sir_db = 0.0;
  double sar_db = 0.0;
};

Ratios sdr_sir_sar(const Decomposition& parts);

struct MetricReport {
  double sdr_db = 0.0;
  double sir_db = 0.0;
  double sar_db = 0.0;
  double nsdr_db = 0.0;
};

/// sdr(estimate) − sdr(mixture), both against `reference`.
double nsdr(const dsp::AudioClip& estimate, const dsp::AudioClip& reference, const dsp::AudioClip& mixture,
            const std::vector<dsp::AudioClip>& others, const DecomposeOptions& options = {});

/// SDR/SIR/SAR of `estimate` plus its NSDR over `mixture`.
MetricReport evaluate(const dsp::AudioClip& estimate, const dsp::AudioClip& reference, const dsp::AudioClip& mixture,
                      const std::vector<dsp::AudioClip>& others, const DecomposeOptions& options = {});

/// Unweighted mean of each field ("G"-prefixed aggregates).
MetricReport mean_report(const std::vector<MetricReport>& reports);

/// 10·log10(num/den) clamped to ±kDbCap.
double capped_db(double numerator, double denominator);

}  // namespace gsrsep::metrics
