#pragma once

#include "gsrsep/common.hpp"

namespace gsrsep::prox {

/// Elementwise shrinkage sign(m)·max(|m| − tau, 0); the prox of tau·‖·‖₁.
Matrix soft_threshold_elementwise(const Matrix& m, double tau);

/// Row-wise group shrinkage (1 − tau/‖m_i‖)₊·m_i; the prox of tau·‖(·)ᵀ‖₂,₁.
/// All-zero rows stay zero.
Matrix soft_threshold_rows(const Matrix& m, double tau);

/// U·max(Σ − tau, 0)·Vᵀ; the prox of tau·‖·‖_*.
Matrix singular_value_threshold(const Matrix& m, double tau);

struct Norms {
  double l1 = 0.0;        // Σ|m_ij|
  double fro = 0.0;       // sqrt(Σ m_ij²)
  double l21_rows = 0.0;  // Σ_i ‖m_i‖₂
  double trace = 0.0;     // Σ σ_i
};

Norms norms(const Matrix& m);

/// Sum of singular values.
double trace_norm(const Matrix& m);

/// Sum of Euclidean norms of the rows.
double l21_rows(const Matrix& m);

/// Singular values in decreasing order.
Vector singular_values(const Matrix& m);

}  // namespace gsrsep::prox
