#pragma once

// Test-only reference computations. Nothing here calls into the code paths it
// checks: minimizers are found numerically, SVDs come from JacobiSVD, and the
// augmented Lagrangian is evaluated term by term.

#include "gsrsep/common.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace gsrsep::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

/// Golden-section search for a unimodal scalar function on [lo, hi].
inline double golden_section_min(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-13) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Exhaustive grid search over [lo, hi] with the given step.
inline double grid_search_min(const std::function<double(double)>& f, double lo, double hi, double step) {
  double best_x = lo, best_f = f(lo);
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 0.5));
  for (long i = 1; i <= count; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  return best_x;
}

/// argmin_J tau·Σ‖J_i‖ + ½‖J − M‖² by projected gradient on the dual
/// min_{‖U_i‖ ≤ tau} ½‖M − U‖², then J = M − U.
inline Matrix rows_prox_oracle(const Matrix& M, double tau, int iters = 2000, double step = 0.1) {
  Matrix U = Matrix::Zero(M.rows(), M.cols());
  for (int it = 0; it < iters; ++it) {
    U -= step * (U - M);
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
      const double n = U.row(i).norm();
      if (n > tau) U.row(i) *= tau / n;
    }
  }
  return M - U;
}

/// Projection onto the spectral-norm ball of radius tau (JacobiSVD).
inline Matrix spectral_ball_projection(const Matrix& M, double tau) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector clipped = svd.singularValues().cwiseMin(tau);
  return svd.matrixU() * clipped.asDiagonal() * svd.matrixV().transpose();
}

/// argmin_J tau·‖J‖_* + ½‖J − M‖² by projected gradient on the dual
/// min_{‖U‖₂ ≤ tau} ½‖M − U‖², then J = M − U.
inline Matrix trace_prox_oracle(const Matrix& M, double tau, int iters = 200, double step = 0.5) {
  Matrix U = Matrix::Zero(M.rows(), M.cols());
  for (int it = 0; it < iters; ++it) {
    U = spectral_ball_projection(U - step * (U - M), tau);
  }
  return M - U;
}

inline double jacobi_trace_norm(const Matrix& M) {
  return Eigen::JacobiSVD<Matrix>(M).singularValues().sum();
}

inline Eigen::Index numerical_rank(const Matrix& M, double threshold) {
  const Vector s = Eigen::JacobiSVD<Matrix>(M).singularValues();
  return (s.array() > threshold).count();
}

/// Random matrix with mutually orthogonal rows of random norms (rows ≤ cols).
inline Matrix orthogonal_rows(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const Matrix g = random_matrix(cols, rows, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(cols, rows);
  std::uniform_real_distribution<double> scale(0.2, 3.0);
  Matrix out = q.transpose();
  for (Eigen::Index i = 0; i < rows; ++i) out.row(i) *= scale(rng);
  return out;
}

struct LagrangianTerms {
  Matrix X, D, E0;
  Matrix Z, J, E, B, Y1, Y2, Y3;
  double mu = 1.0, lambda = 0.1, gamma = 0.0;
  bool row_sparse = true;
};

/// The augmented Lagrangian of the split problem, evaluated term by term.
inline double augmented_lagrangian(const LagrangianTerms& t) {
  const double j_norm = t.row_sparse ? t.J.rowwise().norm().sum() : jacobi_trace_norm(t.J);
  const Matrix r1 = t.X - t.D * t.Z - t.E;
  const Matrix r2 = t.Z - t.J;
  const Matrix r3 = t.E - t.B;
  double value = j_norm + t.lambda * t.B.cwiseAbs().sum();
  if (t.gamma != 0.0) value += 0.5 * t.gamma * (t.E - t.E0).squaredNorm();
  value += (t.Y1.array() * r1.array()).sum() + (t.Y2.array() * r2.array()).sum() + (t.Y3.array() * r3.array()).sum();
  value += 0.5 * t.mu * (r1.squaredNorm() + r2.squaredNorm() + r3.squaredNorm());
  return value;
}

/// Central-difference gradient of `f` with respect to every entry of `at`.
inline Matrix finite_difference_gradient(const std::function<double(const Matrix&)>& f, const Matrix& at,
                                         double h = 1e-5) {
  Matrix grad(at.rows(), at.cols());
  Matrix probe = at;
  for (Eigen::Index j = 0; j < at.cols(); ++j) {
    for (Eigen::Index i = 0; i < at.rows(); ++i) {
      const double orig = probe(i, j);
      probe(i, j) = orig + h;
      const double up = f(probe);
      probe(i, j) = orig - h;
      const double down = f(probe);
      probe(i, j) = orig;
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

/// Exact non-negative lasso by enumerating every support and solving the
/// restricted normal equations in closed form.
inline double nonneg_lasso_enumeration(const Vector& x, const Matrix& D, double lambda, Vector* best = nullptr) {
  const Eigen::Index k = D.cols();
  double best_obj = 0.5 * x.squaredNorm();
  Vector best_alpha = Vector::Zero(k);
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < k; ++j)
      if (mask & (1u << j)) support.push_back(j);
    const auto s = static_cast<Eigen::Index>(support.size());
    Matrix Ds(D.rows(), s);
    for (Eigen::Index c = 0; c < s; ++c) Ds.col(c) = D.col(support[static_cast<std::size_t>(c)]);
    const Vector coef = (Ds.transpose() * Ds).ldlt().solve(Ds.transpose() * x - lambda * Vector::Ones(s));
    if ((coef.array() <= 0.0).any()) continue;
    Vector alpha = Vector::Zero(k);
    for (Eigen::Index c = 0; c < s; ++c) alpha(support[static_cast<std::size_t>(c)]) = coef(c);
    const double obj = 0.5 * (x - D * alpha).squaredNorm() + lambda * alpha.sum();
    if (obj < best_obj) {
      best_obj = obj;
      best_alpha = alpha;
    }
  }
  if (best) *best = best_alpha;
  return best_obj;
}

struct PlantedDictionary {
  Matrix atoms;
  Matrix frames;
};

/// Five non-negative unit atoms with mostly disjoint supports, each frame a
/// non-negative mix of one or two of them.
inline PlantedDictionary planted_nnsc_problem(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::Index m = 40, k = 5, n = 400;
  Matrix atoms = random_matrix(m, k, rng, 0.0, 1.0);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < m; ++i)
      if (i % k != j && rng() % 3 != 0) atoms(i, j) = 0.0;
    atoms.col(j).normalize();
  }
  std::uniform_real_distribution<double> amp(0.5, 2.0);
  Matrix codes = Matrix::Zero(k, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    codes(static_cast<Eigen::Index>(rng() % k), t) = amp(rng);
    if (rng() % 2 == 0) codes(static_cast<Eigen::Index>(rng() % k), t) += amp(rng);
  }
  return {atoms, atoms * codes};
}

inline double best_cosine(const Vector& atom, const Matrix& learned) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < learned.cols(); ++j) {
    const double n = learned.col(j).norm();
    if (n > 0.0) best = std::max(best, atom.dot(learned.col(j)) / (atom.norm() * n));
  }
  return best;
}

}  // namespace gsrsep::testing
