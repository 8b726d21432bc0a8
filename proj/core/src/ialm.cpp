#include "gsrsep/ialm.hpp"

#include "gsrsep/prox.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace gsrsep::ialm {
namespace {

constexpr std::array<std::string_view, 6> kMethodNames = {"rpca", "rpcai", "lrr", "lrri", "gsr", "gsri"};

// Linear map Z ↦ DZ plus the normal-equation solve (I + DᵀD)⁻¹. The rpca
// family uses the identity without materializing an m×m matrix.
class DictionaryOperator {
 public:
  explicit DictionaryOperator(Eigen::Index m) : rows_(m), cols_(m) {}

  explicit DictionaryOperator(const Matrix& d) : D_(&d), rows_(d.rows()), cols_(d.cols()) {
    Matrix gram = Matrix::Identity(cols_, cols_);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(d.transpose());
    llt_.compute(gram.selfadjointView<Eigen::Lower>());
    if (llt_.info() != Eigen::Success) {
      throw NumericalError("Cholesky factorization of I + D^T D failed (non-finite dictionary?)");
    }
  }

  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return cols_; }

  Matrix apply(const Matrix& z) const { return D_ ? Matrix(*D_ * z) : z; }
  Matrix apply_transpose(const Matrix& r) const { return D_ ? Matrix(D_->transpose() * r) : r; }

  Matrix solve_normal(const Matrix& rhs) const { return D_ ? Matrix(llt_.solve(rhs)) : Matrix(0.5 * rhs); }

 private:
  const Matrix* D_ = nullptr;
  Eigen::Index rows_;
  Eigen::Index cols_;
  Eigen::LLT<Matrix> llt_;
};

Matrix z_step(const SolverState& s, const Matrix& X, const DictionaryOperator& op) {
  // Dᵀ(X − E) + DᵀY1/μ = Dᵀ(X − E + Y1/μ): one product with Dᵀ per iteration
  const double inv_mu = 1.0 / s.mu;
  Matrix rhs = op.apply_transpose(X - s.E + inv_mu * s.Y1);
  rhs += s.J - inv_mu * s.Y2;
  return op.solve_normal(rhs);
}

Matrix e_step(const SolverState& s, const Matrix& X, const Matrix& DZ, const Matrix* E0, double gamma) {
  Matrix numer = s.Y1 - s.Y3 + s.mu * (X - DZ + s.B);
  if (gamma != 0.0) {
    numer += gamma * *E0;
  }
  return numer / (gamma + 2.0 * s.mu);
}

void require_finite(const Matrix& m, const char* iterate, std::size_t iter) {
  if (!m.allFinite()) {
    throw NumericalError(std::string("numerical divergence: iterate ") + iterate +
                         " became non-finite at iteration " + std::to_string(iter));
  }
}

void validate(const ProblemSpec& spec, const SolverConfig& cfg) {
  require_real_matrix(spec.X, "X");
  if ((spec.X.array() < 0.0).any()) {
    throw InvalidArgument("X must be a non-negative magnitude spectrogram");
  }
  const auto method = spec.method;
  if (uses_dictionary(method)) {
    if (!spec.D) {
      throw InvalidArgument(std::string(to_string(method)) + " requires a dictionary D");
    }
    require_real_matrix(*spec.D, "D");
    if (spec.D->rows() != spec.X.rows()) {
      throw InvalidArgument("dictionary has " + std::to_string(spec.D->rows()) + " rows but X has " +
                            std::to_string(spec.X.rows()));
    }
  }
  if (is_informed(method)) {
    if (!spec.E0) {
      throw InvalidArgument(std::string(to_string(method)) + " requires an annotation matrix E0");
    }
    require_real_matrix(*spec.E0, "E0");
    require_same_shape(*spec.E0, spec.X, "E0 vs X");
  }
  if (spec.groups) {
    const auto k = uses_dictionary(method) ? spec.D->cols() : spec.X.rows();
    if (spec.groups->total() != static_cast<std::size_t>(k) ||
        std::find(spec.groups->block_sizes.begin(), spec.groups->block_sizes.end(), 0u) !=
            spec.groups->block_sizes.end()) {
      throw InvalidArgument("group partition must consist of positive blocks summing to k=" + std::to_string(k));
    }
  }
  if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) throw InvalidArgument("lambda must be positive");
  if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma)) throw InvalidArgument("gamma must be non-negative");
  if (!is_informed(method) && cfg.gamma != 0.0) {
    throw InvalidArgument("gamma must be 0 for the uninformed method " + std::string(to_string(method)));
  }
  if (!(cfg.mu0 > 0.0)) throw InvalidArgument("mu0 must be positive");
  if (!(cfg.rho >= 1.0)) throw InvalidArgument("rho must be >= 1");
  if (!(cfg.mu_max >= cfg.mu0)) throw InvalidArgument("mu_max must be >= mu0");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (cfg.max_iters == 0) throw InvalidArgument("max_iters must be >= 1");
}

}  // namespace

std::string_view to_string(Method method) noexcept { return kMethodNames[static_cast<std::size_t>(method)]; }

Method parse_method(std::string_view name) {
  for (std::size_t i = 0; i < kMethodNames.size(); ++i) {
    if (kMethodNames[i] == name) {
      return static_cast<Method>(i);
    }
  }
  throw InvalidArgument("unknown method '" + std::string(name) + "' (expected rpca|rpcai|lrr|lrri|gsr|gsri)");
}

bool is_informed(Method method) noexcept {
  return method == Method::rpcai || method == Method::lrri || method == Method::gsri;
}

bool uses_dictionary(Method method) noexcept { return method != Method::rpca && method != Method::rpcai; }

bool uses_row_sparsity(Method method) noexcept { return method == Method::gsr || method == Method::gsri; }

SolverConfig default_config(std::size_t m, std::size_t n, Method method) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>({m, n, 1})));
  SolverConfig cfg;
  cfg.lambda = scale;
  cfg.gamma = is_informed(method) ? 2.0 * scale : 0.0;
  cfg.mu0 = 1e-3;
  cfg.rho = 1.2;
  cfg.mu_max = 1e10;
  cfg.tol = 1e-5;
  cfg.max_iters = 1000;
  return cfg;
}

SolverState SolverState::zeros(Eigen::Index m, Eigen::Index k, Eigen::Index n, double mu0) {
  SolverState s;
  s.Z = Matrix::Zero(k, n);
  s.J = Matrix::Zero(k, n);
  s.Y2 = Matrix::Zero(k, n);
  s.E = Matrix::Zero(m, n);
  s.B = Matrix::Zero(m, n);
  s.Y1 = Matrix::Zero(m, n);
  s.Y3 = Matrix::Zero(m, n);
  s.mu = mu0;
  s.iter = 0;
  return s;
}

Matrix update_J(const SolverState& state, Method method) {
  const Matrix target = state.Z + state.Y2 / state.mu;
  const double tau = 1.0 / state.mu;
  return uses_row_sparsity(method) ? prox::soft_threshold_rows(target, tau)
                                   : prox::singular_value_threshold(target, tau);
}

Matrix update_Z(const SolverState& state, const Matrix& X, const Matrix& D) {
  require_same_shape(X, state.E, "update_Z X vs E");
  if (D.rows() != X.rows() || D.cols() != state.Z.rows()) {
    throw InvalidArgument("update_Z: dictionary shape does not match X and Z");
  }
  const DictionaryOperator op(D);
  return z_step(state, X, op);
}

Matrix update_B(const SolverState& state, double lambda) {
  return prox::soft_threshold_elementwise(state.E + state.Y3 / state.mu, lambda / state.mu);
}

Matrix update_E(const SolverState& state, const Matrix& X, const Matrix& D, const Matrix& E0, double gamma) {
  if (gamma < 0.0) throw InvalidArgument("update_E: gamma must be non-negative");
  if (gamma != 0.0) require_same_shape(E0, X, "update_E E0 vs X");
  return e_step(state, X, D * state.Z, &E0, gamma);
}

SolverState update_multipliers(SolverState state, const Matrix& X, const Matrix& D, double rho, double mu_max) {
  if (!(rho >= 1.0)) throw InvalidArgument("update_multipliers: rho must be >= 1");
  state.Y1 += state.mu * (X - D * state.Z - state.E);
  state.Y2 += state.mu * (state.Z - state.J);
  state.Y3 += state.mu * (state.E - state.B);
  state.mu = std::min(rho * state.mu, mu_max);
  return state;
}

SeparationSolution solve(const ProblemSpec& spec, const SolverConfig& config) {
  validate(spec, config);
  const auto start = std::chrono::steady_clock::now();

  const Matrix& X = spec.X;
  const Eigen::Index m = X.rows();
  const Eigen::Index n = X.cols();
  const DictionaryOperator op = uses_dictionary(spec.method) ? DictionaryOperator(*spec.D) : DictionaryOperator(m);
  const Matrix* E0 = is_informed(spec.method) ? &*spec.E0 : nullptr;
  const double gamma = is_informed(spec.method) ? config.gamma : 0.0;

  const double x_norm = X.norm();
  const double residual_scale = x_norm > 0.0 ? x_norm : 1.0;

  SolverState s = SolverState::zeros(m, op.cols(), n, config.mu0);
  Matrix DZ = Matrix::Zero(m, n);

  SeparationSolution out;
  out.residual_history.reserve(std::min<std::size_t>(config.max_iters, 4096));

  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    s.iter = it;
    s.J = update_J(s, spec.method);
    require_finite(s.J, "J", it);

    s.Z = z_step(s, X, op);
    require_finite(s.Z, "Z", it);
    DZ = op.apply(s.Z);

    s.B = update_B(s, config.lambda);
    require_finite(s.B, "B", it);

    s.E = e_step(s, X, DZ, E0, gamma);
    require_finite(s.E, "E", it);

    const Matrix residual = X - DZ - s.E;
    s.Y1 += s.mu * residual;
    s.Y2 += s.mu * (s.Z - s.J);
    s.Y3 += s.mu * (s.E - s.B);
    s.mu = std::min(config.rho * s.mu, config.mu_max);

    const double rel = residual.norm() / residual_scale;
    out.residual_history.push_back(rel);
    out.iters = it;
    if (config.check_convergence && rel < config.tol) {
      out.converged = true;
      break;
    }
  }

  out.split_gap_z = (s.Z - s.J).norm();
  out.split_gap_e = (s.E - s.B).norm();
  out.final_mu = s.mu;
  out.Z = std::move(s.Z);
  out.E = std::move(s.E);
  out.A = std::move(DZ);
  out.wall_time = std::chrono::steady_clock::now() - start;
  return out;
}

}  // namespace gsrsep::ialm
