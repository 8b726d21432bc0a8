#include "gsrsep/prox.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace gsrsep::prox {
namespace {

void require_tau(double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw InvalidArgument("threshold must be a finite non-negative number, got " + std::to_string(tau));
  }
}

Eigen::BDCSVD<Matrix> thin_svd(const Matrix& m, bool vectors) {
  const unsigned options = vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
  Eigen::BDCSVD<Matrix> svd(m, options);
  if (svd.info() != Eigen::Success || !svd.singularValues().allFinite()) {
    throw NumericalError("SVD of " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " matrix failed to converge (Eigen info=" + std::to_string(static_cast<int>(svd.info())) +
                         ")");
  }
  return svd;
}

}  // namespace

Matrix soft_threshold_elementwise(const Matrix& m, double tau) {
  require_tau(tau);
  return m.unaryExpr([tau](double v) {
    const double mag = std::abs(v) - tau;
    return mag > 0.0 ? std::copysign(mag, v) : 0.0;
  });
}

Matrix soft_threshold_rows(const Matrix& m, double tau) {
  require_tau(tau);
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    // zero rows (and rows inside the tau-ball) map to zero
    if (norm > tau) {
      out.row(i) = (1.0 - tau / norm) * m.row(i);
    }
  }
  return out;
}

Matrix singular_value_threshold(const Matrix& m, double tau) {
  require_tau(tau);
  const auto svd = thin_svd(m, true);
  const Vector shrunk = (svd.singularValues().array() - tau).max(0.0).matrix();
  Eigen::Index rank = 0;
  while (rank < shrunk.size() && shrunk(rank) > 0.0) {
    ++rank;
  }
  if (rank == 0) {
    return Matrix::Zero(m.rows(), m.cols());
  }
  return svd.matrixU().leftCols(rank) * shrunk.head(rank).asDiagonal() *
         svd.matrixV().leftCols(rank).transpose();
}

Vector singular_values(const Matrix& m) { return thin_svd(m, false).singularValues(); }

double trace_norm(const Matrix& m) { return singular_values(m).sum(); }

double l21_rows(const Matrix& m) { return m.rowwise().norm().sum(); }

Norms norms(const Matrix& m) {
  require_real_matrix(m, "norms");
  return Norms{
      .l1 = m.cwiseAbs().sum(),
      .fro = m.norm(),
      .l21_rows = l21_rows(m),
      .trace = trace_norm(m),
  };
}

}  // namespace gsrsep::prox
