#pragma once

#include "gsrsep/common.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace gsrsep::nnsc {

/// Non-negative m×k atom matrix (one magnitude-spectrum atom per column)
/// together with the STFT framing it was learned under.
struct Dictionary {
  Matrix atoms;
  double sample_rate_hz = 22050.0;
  std::size_t fft_size = 1411;
  std::optional<GroupPartition> groups;

  Eigen::Index bins() const noexcept { return atoms.rows(); }
  Eigen::Index size() const noexcept { return atoms.cols(); }
};

struct NnscConfig {
  std::size_t num_atoms = 100;
  double lambda_dict = 0.0;  // <= 0 selects 1/√m
  std::size_t max_epochs = 30;
  std::size_t code_iters = 200;
  /// Projected-gradient steps on D per epoch.
  std::size_t dict_steps = 10;
  std::uint64_t seed = 0;
};

/// Per-epoch diagnostics of train_dictionary.
struct NnscTrace {
  std::vector<double> objective;  // Σ ½‖x − Dα‖² + λ‖α‖₁ after each epoch
  std::size_t reseeded_atoms = 0;
};

/// min_α≥0 ½‖x − Dα‖² + λ‖α‖₁ by cyclic coordinate descent.
Vector sparse_code(const Vector& x, const Matrix& D, double lambda, std::size_t iters);

/// Column-wise sparse_code with optional warm start; returns k×n codes.
Matrix sparse_code_all(const Matrix& X, const Matrix& D, double lambda, std::size_t iters,
                       const Matrix* warm_start = nullptr);

/// Σ_i ½‖x_i − Dα_i‖² + λ‖α_i‖₁.
double nnsc_objective(const Matrix& X, const Matrix& D, const Matrix& codes, double lambda);

/// Batch alternating minimization of the NNSC objective over D ≥ 0,
/// ‖d_j‖₂ ≤ 1 and α ≥ 0. Deterministic given config.seed.
Dictionary train_dictionary(const Matrix& frames, const NnscConfig& config, NnscTrace* trace = nullptr);

/// D = (D₁ … D_κ); groups records the input sizes.
Dictionary concat_dictionaries(const std::vector<Dictionary>& dicts);

/// Row blocks Z₁ … Z_κ of an activation matrix.
std::vector<Matrix> split_activation(const Matrix& Z, const GroupPartition& groups);

/// D_i Z_i for every group (per-source magnitude spectrograms).
std::vector<Matrix> component_spectrograms(const Dictionary& dict, const Matrix& Z);

}  // namespace gsrsep::nnsc
