#pragma once

#include "gsrsep/common.hpp"

#include <chrono>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace gsrsep::ialm {

/// The six decompositions X = A + E solved by the same IALM loop.
///
///  - rpca / rpcai:  ‖A‖_* + λ‖E‖₁                 (A = Z, dictionary is the identity)
///  - lrr  / lrri:   ‖Z‖_* + λ‖E‖₁,       X = DZ + E
///  - gsr  / gsri:   ‖Zᵀ‖₂,₁ + λ‖E‖₁,     X = DZ + E
///
/// The informed ("i") variants add (γ/2)‖E − E₀‖²_F. GSRi with a dictionary that
/// carries a group partition is the multi-dictionary model.
enum class Method { rpca, rpcai, lrr, lrri, gsr, gsri };

std::string_view to_string(Method method) noexcept;
/// Parses "rpca", "rpcai", ...; throws InvalidArgument on unknown names.
Method parse_method(std::string_view name);

bool is_informed(Method method) noexcept;
bool uses_dictionary(Method method) noexcept;
bool uses_row_sparsity(Method method) noexcept;

struct ProblemSpec {
  Matrix X;                              // m×n, non-negative
  std::optional<Matrix> D;               // m×k, required for lrr/gsr families
  std::optional<Matrix> E0;              // m×n, required for informed methods
  Method method = Method::gsr;
  std::optional<GroupPartition> groups;  // partitions the k columns of D
};

struct SolverConfig {
  double lambda = 1.0;
  double gamma = 0.0;
  double mu0 = 1e-3;
  double rho = 1.2;
  double mu_max = 1e10;
  double tol = 1e-5;
  std::size_t max_iters = 1000;
  /// When false the loop always runs max_iters iterations (timing runs).
  bool check_convergence = true;
};

/// λ = 1/√max(m,n), γ = 2/√max(m,n) for informed methods (0 otherwise),
/// μ₀ = 1e-3, ρ = 1.2, tol = 1e-5, μ_max = 1e10, 1000 iterations.
SolverConfig default_config(std::size_t m, std::size_t n, Method method);

/// Iterates of the split problem. Z, J, Y2 are k×n; E, B, Y1, Y3 are m×n.
struct SolverState {
  Matrix Z, J, E, B;
  Matrix Y1, Y2, Y3;
  double mu = 1e-3;
  std::size_t iter = 0;

  /// All-zero iterates and multipliers.
  static SolverState zeros(Eigen::Index m, Eigen::Index k, Eigen::Index n, double mu0);
};

struct SeparationSolution {
  Matrix Z;
  Matrix E;
  Matrix A;  // DZ, or Z for the rpca family
  std::vector<double> residual_history;
  std::size_t iters = 0;
  bool converged = false;
  std::chrono::duration<double> wall_time{0.0};
  double final_mu = 0.0;
  /// ‖Z − J‖_F and ‖E − B‖_F at exit.
  double split_gap_z = 0.0;
  double split_gap_e = 0.0;

  double seconds_per_iter() const noexcept {
    return iters == 0 ? 0.0 : wall_time.count() / static_cast<double>(iters);
  }
};

/// J-subproblem. Row-sparse methods shrink rows of Z + Y2/μ by 1/μ; the
/// low-rank methods shrink its singular values by 1/μ.
Matrix update_J(const SolverState& state, Method method);

/// Stationary point of the augmented Lagrangian in Z:
///   Z = (I + DᵀD)⁻¹ (Dᵀ(X − E) + J + (DᵀY1 − Y2)/μ).
/// Factorizes I + DᵀD on every call; `solve` caches the factorization.
Matrix update_Z(const SolverState& state, const Matrix& X, const Matrix& D);

/// B = shrink(E + Y3/μ, λ/μ).
Matrix update_B(const SolverState& state, double lambda);

/// Stationary point of the augmented Lagrangian in E:
///   E = (γE₀ + Y1 − Y3 + μ(X − DZ) + μB) / (γ + 2μ).
/// `E0` is ignored when gamma == 0 and may then be empty.
Matrix update_E(const SolverState& state, const Matrix& X, const Matrix& D, const Matrix& E0,
                double gamma);

/// Y1 += μ(X − DZ − E), Y2 += μ(Z − J), Y3 += μ(E − B), μ ← min(ρμ, μ_max).
SolverState update_multipliers(SolverState state, const Matrix& X, const Matrix& D, double rho,
                               double mu_max);

/// Runs J → Z → B → E → multipliers until ‖X − DZ − E‖_F/‖X‖_F < tol or
/// max_iters. Non-convergence is reported through `converged`, not thrown.
/// Throws InvalidArgument on inconsistent inputs and NumericalError when an
/// iterate turns non-finite.
SeparationSolution solve(const ProblemSpec& spec, const SolverConfig& config);

}  // namespace gsrsep::ialm
