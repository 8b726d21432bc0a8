#include "gsrsep/metrics.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <string>

namespace gsrsep::metrics {
namespace {

using ConstMap = Eigen::Map<const Vector>;

void require_compatible(const dsp::AudioClip& a, const dsp::AudioClip& b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string("decompose: ") + what + " has " + std::to_string(b.size()) +
                          " samples, estimate has " + std::to_string(a.size()));
  }
  if (a.sample_rate_hz != b.sample_rate_hz) {
    throw InvalidArgument(std::string("decompose: ") + what + " sample rate differs from the estimate");
  }
}

// Columns are delayed copies (0 … L−1 samples) of each source.
Matrix delayed_basis(const std::vector<const dsp::AudioClip*>& sources, std::size_t taps) {
  const auto n = static_cast<Eigen::Index>(sources.front()->size());
  Matrix basis = Matrix::Zero(n, static_cast<Eigen::Index>(sources.size() * taps));
  Eigen::Index col = 0;
  for (const auto* s : sources) {
    const ConstMap v(s->samples.data(), n);
    for (std::size_t d = 0; d < taps; ++d, ++col) {
      const auto delay = static_cast<Eigen::Index>(d);
      if (delay < n) basis.col(col).tail(n - delay) = v.head(n - delay);
    }
  }
  return basis;
}

Vector project(const Matrix& basis, const Vector& x) {
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  const Eigen::Index rank = qr.rank();
  if (rank == 0) return Vector::Zero(x.size());
  Vector coeffs = qr.householderQ().adjoint() * x;
  coeffs.tail(coeffs.size() - rank).setZero();
  return qr.householderQ() * coeffs;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

double capped_db(double numerator, double denominator) {
  if (denominator <= 0.0) return numerator > 0.0 ? kDbCap : 0.0;
  if (numerator <= 0.0) return -kDbCap;
  return std::clamp(10.0 * std::log10(numerator / denominator), -kDbCap, kDbCap);
}

Decomposition decompose(const dsp::AudioClip& estimate, const dsp::AudioClip& target,
                        const std::vector<dsp::AudioClip>& others, const DecomposeOptions& options) {
  dsp::require_valid_clip(estimate, "decompose estimate");
  dsp::require_valid_clip(target, "decompose target");
  require_compatible(estimate, target, "target");
  for (const auto& o : others) require_compatible(estimate, o, "interfering source");
  if (options.filter_length < 1) {
    throw InvalidArgument("decompose: filter length must be >= 1");
  }
  const auto n = static_cast<Eigen::Index>(estimate.size());
  const ConstMap t(target.samples.data(), n);
  if (t.squaredNorm() == 0.0) {
    throw DegenerateInput("decompose: target source has zero energy");
  }
  const Vector est = ConstMap(estimate.samples.data(), n);

  Vector s_target;
  if (options.filter_length == 1) {
    s_target = (t.dot(est) / t.squaredNorm()) * t;
  } else {
    s_target = project(delayed_basis({&target}, options.filter_length), est);
  }

  std::vector<const dsp::AudioClip*> all{&target};
  for (const auto& o : others) all.push_back(&o);
  const Vector p_all = project(delayed_basis(all, options.filter_length), est);

  const Vector e_interf = p_all - s_target;
  const Vector e_artif = est - s_target - e_interf;
  return Decomposition{to_std(s_target), to_std(e_interf), to_std(e_artif)};
}

Ratios sdr_sir_sar(const Decomposition& parts) {
  const auto n = static_cast<Eigen::Index>(parts.s_target.size());
  if (static_cast<Eigen::Index>(parts.e_interf.size()) != n || static_cast<Eigen::Index>(parts.e_artif.size()) != n) {
    throw InvalidArgument("sdr_sir_sar: decomposition parts differ in length");
  }
  const ConstMap s(parts.s_target.data(), n);
  const ConstMap ei(parts.e_interf.data(), n);
  const ConstMap ea(parts.e_artif.data(), n);
  const double target_energy = s.squaredNorm();
  return Ratios{
      .sdr_db = capped_db(target_energy, (ei + ea).squaredNorm()),
      .sir_db = capped_db(target_energy, ei.squaredNorm()),
      .sar_db = capped_db((s + ei).squaredNorm(), ea.squaredNorm()),
  };
}

double nsdr(const dsp::AudioClip& estimate, const dsp::AudioClip& reference, const dsp::AudioClip& mixture,
            const std::vector<dsp::AudioClip>& others, const DecomposeOptions& options) {
  const double sdr_est = sdr_sir_sar(decompose(estimate, reference, others, options)).sdr_db;
  const double sdr_mix = sdr_sir_sar(decompose(mixture, reference, others, options)).sdr_db;
  return sdr_est - sdr_mix;
}

MetricReport evaluate(const dsp::AudioClip& estimate, const dsp::AudioClip& reference, const dsp::AudioClip& mixture,
                      const std::vector<dsp::AudioClip>& others, const DecomposeOptions& options) {
  const Ratios est = sdr_sir_sar(decompose(estimate, reference, others, options));
  const Ratios mix = sdr_sir_sar(decompose(mixture, reference, others, options));
  return MetricReport{est.sdr_db, est.sir_db, est.sar_db, est.sdr_db - mix.sdr_db};
}

MetricReport mean_report(const std::vector<MetricReport>& reports) {
  if (reports.empty()) {
    throw InvalidArgument("mean_report: no reports to aggregate");
  }
  MetricReport mean;
  for (const auto& r : reports) {
    mean.sdr_db += r.sdr_db;
    mean.sir_db += r.sir_db;
    mean.sar_db += r.sar_db;
    mean.nsdr_db += r.nsdr_db;
  }
  const double inv = 1.0 / static_cast<double>(reports.size());
  mean.sdr_db *= inv;
  mean.sir_db *= inv;
  mean.sar_db *= inv;
  mean.nsdr_db *= inv;
  return mean;
}

}  // namespace gsrsep::metrics
