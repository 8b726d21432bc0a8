#pragma once

#include "gsrsep/common.hpp"
#include "gsrsep/dsp.hpp"

#include <cstddef>
#include <vector>

namespace gsrsep::annotation {

constexpr double kMinVoicedHz = 40.0;
constexpr double kMaxVoicedHz = 2000.0;

struct PitchPoint {
  double time_sec = 0.0;
  double f0_hz = 0.0;  // 0 = unvoiced

  bool operator==(const PitchPoint&) const = default;
};

/// Vocal F₀ track with strictly increasing times. Voiced entries lie in
/// [40, 2000] Hz.
class PitchContour {
 public:
  PitchContour() = default;
  /// Throws InvalidArgument if the invariants do not hold.
  explicit PitchContour(std::vector<PitchPoint> points);

  const std::vector<PitchPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  /// F₀ of the entry nearest to `time_sec` (ties resolve to the earlier entry).
  double f0_at(double time_sec) const;

  /// Whether `time_sec` lies within half a median spacing of the contour span.
  bool covers(double time_sec) const;

  bool operator==(const PitchContour&) const = default;

 private:
  std::vector<PitchPoint> points_;
  double half_spacing_ = 0.0;
};

/// Validates a point sequence; returns the index of the first offending
/// entry or points.size() when valid. `reason` receives a description.
std::size_t find_contour_violation(const std::vector<PitchPoint>& points, std::string* reason);

/// Binary bins × frames mask: 1 where |f − n·F₀(t)| < w/2 for some harmonic
/// n ≥ 1 with n·F₀ ≤ Nyquist, f being the bin centre frequency. F₀(t) is the
/// contour entry nearest to the frame centre; frames outside the contour's
/// coverage are unvoiced.
Matrix harmonic_mask(const PitchContour& contour, const dsp::Framing& framing, double width_hz);

/// Number of frames whose centre time falls outside the contour.
std::size_t frames_outside_contour(const PitchContour& contour, const dsp::Framing& framing);

/// E₀ = X ∘ M.
Matrix annotation_matrix(const Matrix& X, const Matrix& mask);

}  // namespace gsrsep::annotation
