#include "dpinv/tensorops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dpinv/errors.hpp"

namespace dpinv {

namespace {

constexpr double kAlgebraicTol = 1e-12;

void require_exponent(double r) {
  if (!(r > 1.0) || !std::isfinite(r)) {
    std::ostringstream os;
    os << "exponent must exceed 1, got " << r;
    throw InvalidArgument(os.str());
  }
}

double max_norm(const ElementVectors& g) {
  double m = 0.0;
  for (const auto& v : g) m = std::max(m, v.norm());
  return m;
}

void require_nondegenerate(const ElementVectors& g) {
  const double tiny = 1e-12 * max_norm(g);
  for (std::size_t e = 0; e < g.size(); ++e) {
    const double n = g[e].norm();
    if (!(n > tiny) || !std::isfinite(n)) {
      std::ostringstream os;
      os << "vanishing gradient on element " << e;
      throw DegenerateGradient(e, os.str());
    }
  }
}

}  // namespace

void ExponentPair::validate() const {
  require_exponent(p);
  require_exponent(q);
  if (p == q) throw InvalidArgument("exponents p and q must differ");
}

FluxValue flux(double r, const Vec2& xi) {
  require_exponent(r);
  const double n = xi.norm();
  if (n == 0.0) return {Vec2::Zero(), r < 2.0};
  return {std::pow(n, r - 2.0) * xi, false};
}

Mat2 flux_jacobian(double r, const Vec2& xi) {
  require_exponent(r);
  const double n2 = xi.squaredNorm();
  if (n2 == 0.0) throw DomainError("flux_jacobian is singular at xi = 0");
  return std::pow(n2, 0.5 * (r - 2.0)) * (Mat2::Identity() + (r - 2.0) * xi * xi.transpose() / n2);
}

Tensor3 flux_hessian(double r, const Vec2& xi) {
  require_exponent(r);
  const double n = xi.norm();
  if (n == 0.0) throw DomainError("flux_hessian is singular at xi = 0");
  const double c1 = (r - 2.0) * std::pow(n, r - 4.0);
  const double c2 = (r - 2.0) * (r - 4.0) * std::pow(n, r - 6.0);
  Tensor3 t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        const double dij = i == j ? 1.0 : 0.0;
        const double dkj = k == j ? 1.0 : 0.0;
        const double dki = k == i ? 1.0 : 0.0;
        t(i, j, k) = c1 * (xi[i] * dkj + xi[j] * dki + xi[k] * dij) + c2 * xi[i] * xi[j] * xi[k];
      }
  return t;
}

MatrixField a_matrix(double r, const ElementVectors& grad_v) {
  require_exponent(r);
  require_nondegenerate(grad_v);
  MatrixField out(grad_v.size());
  for (std::size_t e = 0; e < grad_v.size(); ++e) out[e] = flux_jacobian(r, grad_v[e]);
  return out;
}

double ellipticity_bound(double r, const ElementVectors& grad_v) {
  require_exponent(r);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& g : grad_v) {
    lo = std::min(lo, g.norm());
    hi = std::max(hi, g.norm());
  }
  if (r >= 2.0) return std::min(1.0, r - 1.0) * std::pow(lo, r - 2.0);
  return (r - 1.0) * std::pow(hi, r - 2.0);
}

Mat2 a_dot_at(double p, const Vec2& g0, const Vec2& gV) {
  const double n2 = g0.squaredNorm();
  if (n2 == 0.0) throw DomainError("a_dot is singular at a vanishing gradient");
  const double c = (p - 2.0) * std::pow(n2, 0.5 * (p - 4.0));
  const double s = g0.dot(gV);
  return c * (s * (Mat2::Identity() + (p - 4.0) * g0 * g0.transpose() / n2) +
              g0 * gV.transpose() + gV * g0.transpose());
}

Eigen::Matrix2cd a_dot_at(double p, const Vec2& g0, const CVec2& gV) {
  const Mat2 re = a_dot_at(p, g0, Vec2(gV.real()));
  const Mat2 im = a_dot_at(p, g0, Vec2(gV.imag()));
  return re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
}

MatrixField a_dot(double p, const ElementVectors& grad_v0, const ElementVectors& grad_V) {
  require_exponent(p);
  if (grad_v0.size() != grad_V.size()) throw InvalidArgument("a_dot: gradient fields differ in size");
  require_nondegenerate(grad_v0);
  MatrixField out(grad_v0.size());
  for (std::size_t e = 0; e < grad_v0.size(); ++e) out[e] = a_dot_at(p, grad_v0[e], grad_V[e]);
  return out;
}

MonotonicityReport monotonicity_report(double r, const Vec2& x, const Vec2& y) {
  require_exponent(r);
  MonotonicityReport rep;
  rep.r = r;
  const double nx = x.norm();
  const double ny = y.norm();
  const Vec2 d = x - y;
  const double nd = d.norm();
  const Vec2 jx = flux(r, x).value;
  const Vec2 jy = flux(r, y).value;
  const double scale = std::max({std::pow(nx, r), std::pow(ny, r), 1e-300});

  rep.convexity_lhs = std::pow(nx, r);
  rep.convexity_rhs = std::pow(ny, r) + r * jy.dot(d);
  rep.convexity_holds = rep.convexity_lhs - rep.convexity_rhs >= -kAlgebraicTol * scale;

  rep.pairing = (jx - jy).dot(d);
  if (r >= 2.0) {
    rep.pairing_reference = std::pow(2.0, 2.0 - r) * std::pow(nd, r);
    rep.pairing_bound_holds = rep.pairing - rep.pairing_reference >= -kAlgebraicTol * scale;
  } else {
    rep.pairing_reference = nd > 0.0 ? nd * nd / std::pow(nx + ny, 2.0 - r) : 0.0;
  }
  rep.pairing_positive = nd == 0.0 ? rep.pairing == 0.0 : rep.pairing > 0.0;

  if (nd > 0.0) {
    rep.difference_ratio = (jx - jy).norm() / (std::pow(nx + ny, r - 2.0) * nd);
    rep.difference_holds = std::isfinite(rep.difference_ratio) &&
                           (r < 2.0 || rep.difference_ratio <= (r - 1.0) * (1.0 + kAlgebraicTol));
  }

  rep.power_lhs = std::abs(std::pow(nx, r) - std::pow(ny, r));
  rep.power_rhs = r * (std::pow(nx, r - 1.0) + std::pow(ny, r - 1.0)) * nd;
  rep.power_holds = rep.power_lhs - rep.power_rhs <= kAlgebraicTol * scale;
  return rep;
}

}  // namespace dpinv
