#include "gsrsep/annotation.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace gsrsep {
namespace {

using annotation::PitchContour;
using annotation::PitchPoint;

dsp::Framing framing_for(std::size_t frames) {
  dsp::Framing f;
  f.num_frames = frames;
  f.signal_length = (frames - 1) * f.hop;
  return f;
}

PitchContour steady(double f0, double seconds, double step = 0.01) {
  std::vector<PitchPoint> pts;
  for (double t = 0.0; t <= seconds; t += step) pts.push_back({t, f0});
  return PitchContour(pts);
}

TEST(HarmonicMask, TwoTwentyHertzExample) {
  const auto f = framing_for(10);
  const Matrix mask = annotation::harmonic_mask(steady(220.0, 1.0), f, 80.0);
  EXPECT_NEAR(f.bin_hz(14), 218.8, 0.05);
  EXPECT_NEAR(f.bin_hz(21), 328.2, 0.05);
  for (Eigen::Index t = 0; t < mask.cols(); ++t) {
    EXPECT_EQ(mask(14, t), 1.0);
    EXPECT_EQ(mask(21, t), 0.0);
    for (Eigen::Index b = 0; b < mask.rows(); ++b) {
      const double hz = static_cast<double>(b) * 22050.0 / 1411.0;
      bool on = false;
      for (int h = 1; h * 220.0 <= 11025.0; ++h) on = on || std::abs(hz - h * 220.0) < 40.0;
      ASSERT_EQ(mask(b, t), on ? 1.0 : 0.0) << "bin " << b;
    }
  }
  // (180, 260) holds bins 12..16
  for (Eigen::Index b = 11; b <= 17; ++b) EXPECT_EQ(mask(b, 0), (b >= 12 && b <= 16) ? 1.0 : 0.0) << b;
}

TEST(HarmonicMask, UnvoicedFramesAreEmpty) {
  std::vector<PitchPoint> pts;
  for (int i = 0; i <= 100; ++i) pts.push_back({i * 0.01, i < 50 ? 0.0 : 300.0});
  const auto f = framing_for(60);
  const Matrix mask = annotation::harmonic_mask(PitchContour(pts), f, 80.0);
  for (Eigen::Index t = 0; t < mask.cols(); ++t) {
    const double time = f.frame_time_sec(static_cast<std::size_t>(t));
    if (time < 0.49) {
      EXPECT_TRUE(mask.col(t).isZero(0.0)) << t;
    }
    if (time > 0.51 && time < 1.0) {
      EXPECT_GT(mask.col(t).sum(), 0.0) << t;
    }
  }
}

TEST(HarmonicMask, FramesBeyondContourAreUnvoiced) {
  const auto contour = steady(200.0, 0.5);
  const auto f = framing_for(100);  // about 1.6 s
  const Matrix mask = annotation::harmonic_mask(contour, f, 50.0);
  EXPECT_GT(annotation::frames_outside_contour(contour, f), 0u);
  for (Eigen::Index t = 0; t < mask.cols(); ++t) {
    if (!contour.covers(f.frame_time_sec(static_cast<std::size_t>(t)))) {
      EXPECT_TRUE(mask.col(t).isZero(0.0));
    }
  }
}

TEST(HarmonicMask, SupportBound) {
  const auto f = framing_for(4);
  const double bin_width = 22050.0 / 1411.0;
  for (double f0 : {45.0, 97.3, 220.0, 611.0, 1999.0}) {
    for (double w : {10.0, 40.0, 80.0, 150.0}) {
      const Matrix mask = annotation::harmonic_mask(steady(f0, 0.2), f, w);
      const double bound = std::ceil(11025.0 / f0) * std::ceil(w / bin_width);
      for (Eigen::Index t = 0; t < mask.cols(); ++t) ASSERT_LE(mask.col(t).sum(), bound) << f0 << " " << w;
    }
  }
}

TEST(HarmonicMask, MonotoneInWidth) {
  const auto f = framing_for(5);
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> f0_dist(40.0, 2000.0), w_dist(1.0, 200.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto contour = steady(f0_dist(rng), 0.2);
    double w1 = w_dist(rng), w2 = w_dist(rng);
    if (w1 > w2) std::swap(w1, w2);
    const Matrix narrow = annotation::harmonic_mask(contour, f, w1);
    const Matrix wide = annotation::harmonic_mask(contour, f, w2);
    ASSERT_TRUE((narrow.array() <= wide.array()).all());
  }
}

TEST(HarmonicMask, Errors) {
  const auto f = framing_for(3);
  EXPECT_THROW(annotation::harmonic_mask(PitchContour(), f, 80.0), InvalidArgument);
  EXPECT_THROW(annotation::harmonic_mask(steady(200.0, 0.1), f, 0.0), InvalidArgument);
}

TEST(PitchContour, NearestLookup) {
  const PitchContour c({{0.0, 100.0}, {0.1, 200.0}, {0.2, 0.0}});
  EXPECT_EQ(c.f0_at(0.04), 100.0);
  EXPECT_EQ(c.f0_at(0.06), 200.0);
  EXPECT_EQ(c.f0_at(0.05), 100.0);
  EXPECT_EQ(c.f0_at(0.19), 0.0);
  EXPECT_EQ(c.f0_at(5.0), 0.0);
  EXPECT_TRUE(c.covers(0.25));
  EXPECT_FALSE(c.covers(0.26));
}

TEST(PitchContour, RejectsInvalidPoints) {
  EXPECT_THROW(PitchContour({{0.0, 100.0}, {0.0, 110.0}}), InvalidArgument);
  EXPECT_THROW(PitchContour({{0.1, 100.0}, {0.05, 110.0}}), InvalidArgument);
  EXPECT_THROW(PitchContour({{0.0, -1.0}}), InvalidArgument);
  EXPECT_THROW(PitchContour({{0.0, 30.0}}), InvalidArgument);
  EXPECT_THROW(PitchContour({{0.0, 2500.0}}), InvalidArgument);
  EXPECT_THROW(PitchContour({{-0.1, 100.0}}), InvalidArgument);
  EXPECT_NO_THROW(PitchContour({{0.0, 0.0}, {0.1, 40.0}, {0.2, 2000.0}}));
}

TEST(AnnotationMatrix, Examples) {
  std::mt19937_64 rng(62);
  const Matrix X = testing::random_matrix(8, 6, rng, 0.0, 1.0);
  EXPECT_EQ(annotation::annotation_matrix(X, Matrix::Ones(8, 6)), X);
  EXPECT_TRUE(annotation::annotation_matrix(X, Matrix::Zero(8, 6)).isZero(0.0));
  Matrix M(8, 6);
  for (Eigen::Index j = 0; j < 6; ++j)
    for (Eigen::Index i = 0; i < 8; ++i) M(i, j) = (rng() % 2) ? 1.0 : 0.0;
  const Matrix E0 = annotation::annotation_matrix(X, M);
  for (Eigen::Index j = 0; j < 6; ++j) {
    for (Eigen::Index i = 0; i < 8; ++i) {
      EXPECT_EQ(E0(i, j), M(i, j) == 1.0 ? X(i, j) : 0.0);
      EXPECT_LE(E0(i, j), X(i, j));
    }
  }
}

TEST(AnnotationMatrix, Errors) {
  EXPECT_THROW(annotation::annotation_matrix(Matrix::Ones(3, 3), Matrix::Ones(3, 2)), InvalidArgument);
  EXPECT_THROW(annotation::annotation_matrix(Matrix::Ones(3, 3), Matrix::Constant(3, 3, 0.5)), InvalidArgument);
}

}  // namespace
}  // namespace gsrsep
