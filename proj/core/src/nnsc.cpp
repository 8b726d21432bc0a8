#include "gsrsep/nnsc.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace gsrsep::nnsc {
namespace {

constexpr double kCodeChangeTol = 1e-13;

// Coordinate descent on the Gram form ½αᵀGα − bᵀα + λ1ᵀα, α ≥ 0.
void coordinate_descent(const Matrix& gram, const Eigen::Ref<const Vector>& dtx, double lambda,
                        std::size_t iters, Eigen::Ref<Vector> alpha) {
  const Eigen::Index k = gram.rows();
  // gradient cache g = Gα − b
  Vector g = gram * alpha - dtx;
  for (std::size_t sweep = 0; sweep < iters; ++sweep) {
    double max_change = 0.0;
    double max_coef = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double gjj = gram(j, j);
      if (gjj <= 0.0) {
        alpha(j) = 0.0;
        continue;
      }
      const double old = alpha(j);
      const double updated = std::max(0.0, old - (g(j) + lambda) / gjj);
      const double delta = updated - old;
      if (delta != 0.0) {
        g.noalias() += delta * gram.col(j);
        alpha(j) = updated;
      }
      max_change = std::max(max_change, std::abs(delta));
      max_coef = std::max(max_coef, updated);
    }
    if (max_change <= kCodeChangeTol * (1.0 + max_coef)) {
      break;
    }
  }
}

// Projection onto {d ≥ 0, ‖d‖₂ ≤ 1} applied per column.
void project_atoms(Matrix& D) {
  D = D.cwiseMax(0.0);
  for (Eigen::Index j = 0; j < D.cols(); ++j) {
    const double norm = D.col(j).norm();
    if (norm > 1.0) {
      D.col(j) /= norm;
    }
  }
}

double resolve_lambda(const NnscConfig& cfg, Eigen::Index m) {
  return cfg.lambda_dict > 0.0 ? cfg.lambda_dict : 1.0 / std::sqrt(static_cast<double>(m));
}

}  // namespace

Vector sparse_code(const Vector& x, const Matrix& D, double lambda, std::size_t iters) {
  if (x.size() != D.rows()) {
    throw InvalidArgument("sparse_code: signal has " + std::to_string(x.size()) + " entries but dictionary has " +
                          std::to_string(D.rows()) + " rows");
  }
  if ((x.array() < 0.0).any()) {
    throw InvalidArgument("sparse_code: signal must be non-negative");
  }
  if (lambda < 0.0) {
    throw InvalidArgument("sparse_code: lambda must be non-negative");
  }
  const Matrix gram = D.transpose() * D;
  const Vector dtx = D.transpose() * x;
  Vector alpha = Vector::Zero(D.cols());
  coordinate_descent(gram, dtx, lambda, iters, alpha);
  return alpha;
}

Matrix sparse_code_all(const Matrix& X, const Matrix& D, double lambda, std::size_t iters, const Matrix* warm_start) {
  if (X.rows() != D.rows()) {
    throw InvalidArgument("sparse_code_all: frame dimension does not match dictionary");
  }
  const Matrix gram = D.transpose() * D;
  const Matrix dtx = D.transpose() * X;
  Matrix codes = warm_start ? *warm_start : Matrix::Zero(D.cols(), X.cols());
  if (codes.rows() != D.cols() || codes.cols() != X.cols()) {
    throw InvalidArgument("sparse_code_all: warm start has the wrong shape");
  }
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    coordinate_descent(gram, dtx.col(i), lambda, iters, codes.col(i));
  }
  return codes;
}

double nnsc_objective(const Matrix& X, const Matrix& D, const Matrix& codes, double lambda) {
  return 0.5 * (X - D * codes).squaredNorm() + lambda * codes.cwiseAbs().sum();
}

Dictionary train_dictionary(const Matrix& frames, const NnscConfig& config, NnscTrace* trace) {
  const Eigen::Index m = frames.rows();
  const Eigen::Index n = frames.cols();
  const auto k = static_cast<Eigen::Index>(config.num_atoms);
  if (k < 1) {
    throw InvalidArgument("train_dictionary: num_atoms must be >= 1");
  }
  require_real_matrix(frames, "training frames");
  if ((frames.array() < 0.0).any()) {
    throw InvalidArgument("train_dictionary: frames must be non-negative");
  }
  if (n < k) {
    throw InvalidArgument("train_dictionary: " + std::to_string(n) + " frames is fewer than " + std::to_string(k) +
                          " atoms");
  }
  const Vector frame_norms = frames.colwise().norm().transpose();
  std::vector<Eigen::Index> nonzero;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (frame_norms(i) > 0.0) nonzero.push_back(i);
  }
  if (nonzero.empty()) {
    throw DegenerateInput("train_dictionary: all training frames are zero");
  }

  const double lambda = resolve_lambda(config, m);
  std::mt19937_64 rng(config.seed);

  // initialize from distinct random non-zero frames, cycling if there are too few
  std::shuffle(nonzero.begin(), nonzero.end(), rng);
  Matrix D(m, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index src = nonzero[static_cast<std::size_t>(j) % nonzero.size()];
    D.col(j) = frames.col(src) / frame_norms(src);
  }

  Matrix codes = Matrix::Zero(k, n);
  NnscTrace local;
  NnscTrace& tr = trace ? *trace : local;
  tr.objective.clear();

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    codes = sparse_code_all(frames, D, lambda, config.code_iters, &codes);

    // projected gradient on ½‖X − DA‖², step 1/L with L = λ_max(AAᵀ)
    const Matrix aat = codes * codes.transpose();
    const Matrix xat = frames * codes.transpose();
    const double lipschitz = Eigen::SelfAdjointEigenSolver<Matrix>(aat, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (lipschitz > 0.0) {
      const double step = 1.0 / lipschitz;
      for (std::size_t s = 0; s < config.dict_steps; ++s) {
        D -= step * (D * aat - xat);
        project_atoms(D);
      }
    }

    tr.objective.push_back(nnsc_objective(frames, D, codes, lambda));

    // unused atoms are re-seeded from the worst-reconstructed frames; their
    // codes are zero so the objective is unchanged
    std::vector<Eigen::Index> dead;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (codes.row(j).maxCoeff() <= 0.0) dead.push_back(j);
    }
    if (!dead.empty() && epoch + 1 < config.max_epochs) {
      const Vector errors = (frames - D * codes).colwise().squaredNorm().transpose();
      std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return errors(a) > errors(b); });
      std::size_t next = 0;
      for (const Eigen::Index j : dead) {
        while (next < order.size() && frame_norms(order[next]) <= 0.0) ++next;
        if (next >= order.size()) break;
        const Eigen::Index src = order[next++];
        D.col(j) = frames.col(src) / frame_norms(src);
        ++tr.reseeded_atoms;
      }
    }
  }

  if (D.colwise().norm().maxCoeff() <= 0.0) {
    throw DegenerateInput("train_dictionary: every atom collapsed to zero");
  }
  Dictionary out;
  out.atoms = std::move(D);
  return out;
}

Dictionary concat_dictionaries(const std::vector<Dictionary>& dicts) {
  if (dicts.empty()) {
    throw InvalidArgument("concat_dictionaries: no dictionaries given");
  }
  const auto& first = dicts.front();
  Eigen::Index total = 0;
  GroupPartition groups;
  for (const auto& d : dicts) {
    if (d.bins() != first.bins()) {
      throw InvalidArgument("concat_dictionaries: dictionaries have different bin counts (" +
                            std::to_string(d.bins()) + " vs " + std::to_string(first.bins()) + ")");
    }
    if (d.sample_rate_hz != first.sample_rate_hz || d.fft_size != first.fft_size) {
      throw InvalidArgument("concat_dictionaries: dictionaries were trained with different STFT framing");
    }
    if (d.size() < 1) {
      throw InvalidArgument("concat_dictionaries: empty dictionary");
    }
    total += d.size();
    groups.block_sizes.push_back(static_cast<std::size_t>(d.size()));
  }
  Dictionary out;
  out.sample_rate_hz = first.sample_rate_hz;
  out.fft_size = first.fft_size;
  out.atoms.resize(first.bins(), total);
  Eigen::Index col = 0;
  for (const auto& d : dicts) {
    out.atoms.middleCols(col, d.size()) = d.atoms;
    col += d.size();
  }
  out.groups = std::move(groups);
  return out;
}

std::vector<Matrix> split_activation(const Matrix& Z, const GroupPartition& groups) {
  if (groups.total() != static_cast<std::size_t>(Z.rows())) {
    throw InvalidArgument("split_activation: Z has " + std::to_string(Z.rows()) + " rows but groups sum to " +
                          std::to_string(groups.total()));
  }
  std::vector<Matrix> blocks;
  blocks.reserve(groups.count());
  Eigen::Index row = 0;
  for (const auto size : groups.block_sizes) {
    const auto rows = static_cast<Eigen::Index>(size);
    blocks.emplace_back(Z.middleRows(row, rows));
    row += rows;
  }
  return blocks;
}

std::vector<Matrix> component_spectrograms(const Dictionary& dict, const Matrix& Z) {
  if (Z.rows() != dict.size()) {
    throw InvalidArgument("component_spectrograms: activation rows do not match dictionary size");
  }
  const GroupPartition groups = dict.groups.value_or(GroupPartition{{static_cast<std::size_t>(dict.size())}});
  const auto blocks = split_activation(Z, groups);
  std::vector<Matrix> out;
  out.reserve(blocks.size());
  Eigen::Index col = 0;
  for (const auto& block : blocks) {
    out.emplace_back(dict.atoms.middleCols(col, block.rows()) * block);
    col += block.rows();
  }
  return out;
}

}  // namespace gsrsep::nnsc
