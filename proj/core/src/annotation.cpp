#include "gsrsep/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gsrsep::annotation {

std::size_t find_contour_violation(const std::vector<PitchPoint>& points, std::string* reason) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    auto fail = [&](std::string why) {
      if (reason) *reason = std::move(why);
      return i;
    };
    if (!std::isfinite(p.time_sec) || p.time_sec < 0.0) {
      return fail("time must be a finite non-negative number");
    }
    if (!std::isfinite(p.f0_hz) || p.f0_hz < 0.0) {
      return fail("f0 must be a finite non-negative number");
    }
    if (p.f0_hz != 0.0 && (p.f0_hz < kMinVoicedHz || p.f0_hz > kMaxVoicedHz)) {
      return fail("voiced f0 " + std::to_string(p.f0_hz) + " Hz outside [40, 2000] Hz");
    }
    if (i > 0 && !(p.time_sec > points[i - 1].time_sec)) {
      return fail("times must be strictly increasing");
    }
  }
  return points.size();
}

PitchContour::PitchContour(std::vector<PitchPoint> points) : points_(std::move(points)) {
  std::string reason;
  const auto bad = find_contour_violation(points_, &reason);
  if (bad != points_.size()) {
    throw InvalidArgument("pitch contour entry " + std::to_string(bad) + ": " + reason);
  }
  if (points_.size() > 1) {
    std::vector<double> gaps;
    gaps.reserve(points_.size() - 1);
    for (std::size_t i = 1; i < points_.size(); ++i) {
      gaps.push_back(points_[i].time_sec - points_[i - 1].time_sec);
    }
    auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    half_spacing_ = 0.5 * *mid;
  }
}

double PitchContour::f0_at(double time_sec) const {
  if (points_.empty()) {
    throw InvalidArgument("pitch contour is empty");
  }
  auto it = std::lower_bound(points_.begin(), points_.end(), time_sec,
                             [](const PitchPoint& p, double t) { return p.time_sec < t; });
  if (it == points_.begin()) return it->f0_hz;
  if (it == points_.end()) return points_.back().f0_hz;
  const auto prev = std::prev(it);
  return (time_sec - prev->time_sec) <= (it->time_sec - time_sec) ? prev->f0_hz : it->f0_hz;
}

bool PitchContour::covers(double time_sec) const {
  if (points_.empty()) return false;
  return time_sec >= points_.front().time_sec - half_spacing_ && time_sec <= points_.back().time_sec + half_spacing_;
}

Matrix harmonic_mask(const PitchContour& contour, const dsp::Framing& framing, double width_hz) {
  if (contour.empty()) {
    throw InvalidArgument("harmonic_mask: pitch contour is empty");
  }
  if (!(width_hz > 0.0) || !std::isfinite(width_hz)) {
    throw InvalidArgument("harmonic_mask: mask width must be positive");
  }
  const auto bins = static_cast<Eigen::Index>(framing.bins());
  const auto frames = static_cast<Eigen::Index>(framing.num_frames);
  const double nyquist = framing.sample_rate_hz / 2.0;
  const double half_width = width_hz / 2.0;

  Matrix mask = Matrix::Zero(bins, frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double centre = framing.frame_time_sec(static_cast<std::size_t>(t));
    if (!contour.covers(centre)) continue;
    const double f0 = contour.f0_at(centre);
    if (f0 <= 0.0) continue;
    const auto harmonics = static_cast<long>(std::floor(nyquist / f0));
    for (long h = 1; h <= harmonics; ++h) {
      const double target = static_cast<double>(h) * f0;
      // candidate bins around the harmonic; the strict test below decides
      const double lo_hz = target - half_width;
      const double hi_hz = target + half_width;
      const auto lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(lo_hz / framing.bin_hz(1))));
      const auto hi = std::min<Eigen::Index>(bins - 1, static_cast<Eigen::Index>(std::ceil(hi_hz / framing.bin_hz(1))));
      for (Eigen::Index b = lo; b <= hi; ++b) {
        if (std::abs(framing.bin_hz(static_cast<std::size_t>(b)) - target) < half_width) {
          mask(b, t) = 1.0;
        }
      }
    }
  }
  return mask;
}

std::size_t frames_outside_contour(const PitchContour& contour, const dsp::Framing& framing) {
  std::size_t outside = 0;
  for (std::size_t t = 0; t < framing.num_frames; ++t) {
    if (!contour.covers(framing.frame_time_sec(t))) ++outside;
  }
  return outside;
}

Matrix annotation_matrix(const Matrix& X, const Matrix& mask) {
  require_same_shape(X, mask, "annotation_matrix X vs M");
  if (!(mask.array() == 0.0 || mask.array() == 1.0).all()) {
    throw InvalidArgument("annotation_matrix: mask must be binary");
  }
  return X.cwiseProduct(mask);
}

}  // namespace gsrsep::annotation
