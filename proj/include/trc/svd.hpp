#pragma once

#include <Eigen/Core>

namespace trc {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct TruncatedSVD {
  Matrix u;   // m × r, orthonormal columns
  Vector s;   // r values, non-increasing
  Matrix vt;  // r × n
  double discarded_energy = 0.0;  // Σ_{i>r} σ_i²

  Eigen::Index rank() const noexcept { return s.size(); }
};

/// Keeps the smallest leading rank r ≥ 1 whose tail energy Σ_{i>r} σ_i² is at
/// most delta² (plus a floor of min(m,n)·(σ_1·max(m,n)·ε_mach)² so that
/// numerically zero singular values never count as signal).
TruncatedSVD truncated_svd(const Matrix& a, double delta);

/// Tail-energy rule on an already computed spectrum.
Eigen::Index truncation_rank(const Vector& singular_values, double delta, Eigen::Index rows, Eigen::Index cols);

}  // namespace trc
