#pragma once

#include <array>
#include <vector>

#include "dpinv/mesh.hpp"

namespace dpinv {

/// Growth exponents of the double phase energy; 1 < p, 1 < q, p != q.
struct ExponentPair {
  double p = 2.0;
  double q = 3.0;

  void validate() const;
};

/// Per-element symmetric 2x2 matrices.
using MatrixField = std::vector<Mat2>;

struct FluxValue {
  Vec2 value;
  /// Set for r < 2 at xi = 0, where the zero value is the continuous extension.
  bool degenerate = false;
};

/// J^r(xi) = |xi|^(r-2) xi.
FluxValue flux(double r, const Vec2& xi);

/// grad J^r(xi) = |xi|^(r-2) (1 + (r-2) xi xi^T / |xi|^2). Throws DomainError at xi = 0.
Mat2 flux_jacobian(double r, const Vec2& xi);

/// Second derivatives d^2 J^r_k / d xi_i d xi_j, fully symmetric in (i, j, k).
struct Tensor3 {
  std::array<double, 8> v{};
  double& operator()(int i, int j, int k) { return v[4 * i + 2 * j + k]; }
  double operator()(int i, int j, int k) const { return v[4 * i + 2 * j + k]; }
};

/// Throws DomainError at xi = 0.
Tensor3 flux_hessian(double r, const Vec2& xi);

/// Elementwise flux_jacobian(r, grad_v). Throws DegenerateGradient naming the
/// first element whose gradient vanishes (relative to the largest gradient).
MatrixField a_matrix(double r, const ElementVectors& grad_v);

/// Lower bound on the smallest eigenvalue of a_matrix(r, grad_v):
/// min(1, r-1) * min|grad v|^(r-2) for r >= 2, (r-1) * max|grad v|^(r-2) for r < 2.
double ellipticity_bound(double r, const ElementVectors& grad_v);

/// Directional derivative of grad J^p at g0 along gV (linear in gV).
Mat2 a_dot_at(double p, const Vec2& g0, const Vec2& gV);
Eigen::Matrix2cd a_dot_at(double p, const Vec2& g0, const CVec2& gV);

/// Elementwise a_dot_at. Throws DegenerateGradient where grad_v0 vanishes.
MatrixField a_dot(double p, const ElementVectors& grad_v0, const ElementVectors& grad_V);

/// The four vector inequalities for the flux J^r at a pair (x, y).
struct MonotonicityReport {
  double r = 2.0;
  // |x|^r >= |y|^r + r |y|^(r-2) y.(x-y)
  double convexity_lhs = 0.0;
  double convexity_rhs = 0.0;
  bool convexity_holds = true;
  // (J(x) - J(y)).(x - y)
  double pairing = 0.0;
  // 2^(2-r) |x-y|^r for r >= 2, |x-y|^2 / (|x|+|y|)^(2-r) for r < 2.
  double pairing_reference = 0.0;
  bool pairing_positive = true;
  /// r >= 2 only: pairing >= 2^(2-r)|x-y|^r. Always true for r < 2.
  bool pairing_bound_holds = true;
  // |J(x) - J(y)| / ((|x|+|y|)^(r-2) |x-y|); bounded by r-1 when r >= 2.
  double difference_ratio = 0.0;
  bool difference_holds = true;
  // ||x|^r - |y|^r| <= r (|x|^(r-1) + |y|^(r-1)) |x-y|
  double power_lhs = 0.0;
  double power_rhs = 0.0;
  bool power_holds = true;

  bool all_hold() const {
    return convexity_holds && pairing_positive && pairing_bound_holds && difference_holds &&
           power_holds;
  }
};

MonotonicityReport monotonicity_report(double r, const Vec2& x, const Vec2& y);

}  // namespace dpinv
