#include <doctest.h>

#include "dpinv/errors.hpp"
#include "dpinv/linear_elliptic.hpp"
#include "dpinv/tensorops.hpp"
#include "helpers.hpp"

using namespace dpinv;

namespace {

const double pi = std::numbers::pi;

NodalField manufactured(int n, const Mat2& a) {
  const MeshPtr mesh = build_mesh(n, n);
  ElementVectors f(mesh->num_elements());
  for (std::size_t e = 0; e < f.size(); ++e) {
    const Point c = mesh->centroid(e);
    const Vec2 g(pi * std::cos(pi * c.x()) * std::sin(pi * c.y()), pi * std::sin(pi * c.x()) * std::cos(pi * c.y()));
    f[e] = -a * g;
  }
  return solve_linear(LinearProblem(mesh, MatrixField(f.size(), a), f, boundary_values(mesh, [](const Point&) { return 0.0; })));
}

double sine_error(const NodalField& r) {
  return l2_error(r, [](const Point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); });
}

}  // namespace

TEST_SUITE("linear_elliptic") {
  TEST_CASE("zero data gives zero") {
    const MeshPtr m = build_mesh(8, 8);
    const NodalField r = solve_linear(LinearProblem(m, MatrixField(m->num_elements(), Mat2::Identity()),
                                                    ElementVectors(m->num_elements(), Vec2::Zero()),
                                                    boundary_values(m, [](const Point&) { return 0.0; })));
    CHECK(max_abs(r) == 0.0);
  }

  TEST_CASE("manufactured solutions converge at second order") {
    const Vec2 z(0.6, 0.8);
    for (const Mat2& a : {Mat2(Mat2::Identity()), Mat2(Mat2::Identity() + 1.5 * z * z.transpose())}) {
      const double e16 = sine_error(manufactured(16, a)), e32 = sine_error(manufactured(32, a)),
                   e64 = sine_error(manufactured(64, a));
      CHECK(std::log2(e16 / e32) >= 1.9);
      CHECK(std::log2(e32 / e64) >= 1.9);
    }
  }

  TEST_CASE("Galerkin orthogonality and linearity") {
    const MeshPtr m = build_mesh(16, 16);
    MatrixField a(m->num_elements());
    ElementVectors f1(a.size()), f2(a.size());
    for (std::size_t e = 0; e < a.size(); ++e) {
      const Point c = m->centroid(e);
      a[e] << 1.0 + c.x(), 0.2, 0.2, 2.0 - c.y();
      f1[e] = Vec2(std::sin(5 * c.x()), c.y());
      f2[e] = Vec2(c.x() * c.y(), -1.0);
    }
    const auto g1 = boundary_values(m, [](const Point& x) { return x.x(); });
    const auto g2 = boundary_values(m, [](const Point& x) { return std::cos(x.y()); });
    const EllipticOperator op(m, a);
    const NodalField r1 = op.solve(f1, g1), r2 = op.solve(f2, g2);
    ElementVectors fs(a.size());
    for (std::size_t e = 0; e < a.size(); ++e) fs[e] = f1[e] + f2[e];
    const NodalField rs = op.solve(fs, g1 + g2);
    CHECK(max_abs(rs - r1 - r2) <= 1e-10 * max_abs(rs));
    CHECK(op.galerkin_residual(r1, f1) <= 1e-10);
  }

  TEST_CASE("indefinite coefficients are rejected") {
    const MeshPtr m = build_mesh(4, 4);
    MatrixField a(m->num_elements(), Mat2::Identity());
    a[3] << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(check_ellipticity(a), EllipticityError);
  }

  TEST_CASE("first corrector") {
    const ProblemSpec zero = testing::make_spec(16, 2.0, 3.0);
    const NodalField v = testing::affine(zero.mesh(), Vec2(0.6, 0.8));
    CHECK(max_abs(solve_R(zero, v)) == 0.0);
    const ProblemSpec constant = testing::make_spec(16, 2.5, 1.5, 0.8);
    CHECK(max_abs(solve_R(constant, testing::affine(constant.mesh(), Vec2(0.6, 0.8)))) <= 1e-13);

    const ProblemSpec bump = testing::bump_spec(16, 2.5, 3.5);
    const NodalField vb = testing::affine(bump.mesh(), Vec2(0.6, 0.8));
    const NodalField r = solve_R(bump, vb);
    const auto gv = gradient(vb);
    const auto ae = bump.element_coefficient();
    ElementVectors f(gv.size());
    for (std::size_t e = 0; e < f.size(); ++e) f[e] = ae[e] * flux(3.5, gv[e]).value;  // div(A grad R) = -div F
    const NodalField direct = solve_linear(
        LinearProblem(bump.mesh(), a_matrix(2.5, gv), f, boundary_values(bump.mesh(), [](const Point&) { return 0.0; })));
    CHECK(max_abs(r - direct) <= 1e-12 * std::max(1.0, max_abs(r)));

    // R_{lambda v} = lambda^{q-p+1} R_v.
    const double lam = 1.7;
    const NodalField rl = solve_R(bump, lam * vb);
    CHECK(max_abs(rl - std::pow(lam, 3.5 - 2.5 + 1.0) * r) <= 1e-10 * max_abs(rl));
  }

  TEST_CASE("linearized problem") {
    const MeshPtr m = build_mesh(32, 32);
    const Vec2 z(0.6, 0.8);
    const NodalField v0 = testing::affine(m, z);
    const auto w = [](const Point& x) { return 2.0 * x.x() - x.y() + 0.5; };
    CHECK(max_abs(solve_V(3.0, v0, boundary_values(m, w)) - interpolate(m, w)) <= 1e-12);
    CHECK(max_abs(solve_V(1.5, v0, boundary_values(m, [](const Point&) { return 1.0; })) - NodalField(m, 1.0)) <= 1e-12);

    // Exact CGO solution, second-order convergence.
    const double p = 3.0;
    const FrequencySample s = cgo_data(p, Vec2(2.0 * pi, pi));
    std::vector<double> errs;
    for (int n : {32, 64}) {
      const MeshPtr mn = build_mesh(n, n);
      const ComplexNodalField V = solve_V(
          p, testing::affine(mn, s.z),
          complex_boundary_values(mn, [&](const Point& x) { return cgo_value(s.zeta_plus, x); }));
      errs.push_back(std::hypot(l2_error(V.re, [&](const Point& x) { return cgo_value(s.zeta_plus, x).real(); }),
                                l2_error(V.im, [&](const Point& x) { return cgo_value(s.zeta_plus, x).imag(); })));
    }
    CHECK(std::log2(errs[0] / errs[1]) >= 1.8);
  }

  TEST_CASE("corrector derivative") {
    const ProblemSpec zero = testing::make_spec(16, 3.0, 2.0);
    const NodalField v0 = testing::affine(zero.mesh(), Vec2(1.0, 0.0));
    const NodalField V = solve_V(3.0, v0, boundary_values(zero.mesh(), [](const Point& x) { return x.x() * x.y(); }));
    CHECK(max_abs(solve_Rdot(zero, v0, V, solve_R(zero, v0))) == 0.0);

    // Against a Richardson-extrapolated difference quotient along v0 + tau V.
    const ProblemSpec spec = testing::bump_spec(64, 2.5, 3.5);
    const NodalField v = testing::affine(spec.mesh(), Vec2(1.0, 0.0));
    const NodalField W = solve_V(2.5, v, boundary_values(spec.mesh(), [](const Point& x) { return x.x() * x.y(); }));
    const NodalField r0 = solve_R(spec, v);
    const NodalField rdot = solve_Rdot(spec, v, W, r0);
    const auto dq = [&](double tau) { return (1.0 / (2.0 * tau)) * (solve_R(spec, v + tau * W) - solve_R(spec, v - tau * W)); };
    const NodalField rich = (1.0 / 3.0) * (4.0 * dq(5e-3) - dq(1e-2));
    CHECK(l2_norm(rich - rdot) <= 1e-3 * l2_norm(rdot));
  }
}
