#include <doctest.h>

#include "dpinv/asymptotics.hpp"
#include "dpinv/errors.hpp"
#include "dpinv/linear_elliptic.hpp"
#include "helpers.hpp"

using namespace dpinv;

TEST_SUITE("asymptotics") {
  TEST_CASE("schedules") {
    const auto eps = LimitSchedule::small_epsilon();
    CHECK(eps.values == std::vector<double>{0.2, 0.1, 0.05, 0.025});
    CHECK(eps.refinement_ratio() == doctest::Approx(2.0));
    CHECK(LimitSchedule::large_mu().values == std::vector<double>{5, 10, 20, 40});
    CHECK(LimitSchedule::for_exponents({3.0, 2.0}).values.front() == 5.0);
    LimitSchedule bad{{0.1, 0.3}, 1};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }

  TEST_CASE("Richardson on a synthetic power series") {
    const double gamma = 0.5, limit = 1.25;
    std::vector<double> v;
    for (int k = 0; k < 5; ++k) {
      const double s = 0.2 * std::pow(0.5, k);
      v.push_back(limit + 0.7 * std::pow(s, gamma) - 0.3 * std::pow(s, 2 * gamma) + 0.1 * std::pow(s, 3 * gamma));
    }
    const LimitEstimate est = richardson(v, 2.0, 3, gamma);
    CHECK(std::abs(est.value - limit) <= 1e-10);
    CHECK_FALSE(est.flagged);
    // A non-monotone sequence is flagged.
    const LimitEstimate bad = richardson(std::vector<double>{1.0, 2.0, 1.0, 2.0}, 2.0, 3, 1.0);
    CHECK(bad.flagged);
  }

  TEST_CASE("zero coefficient") {
    const ProblemSpec spec = testing::make_spec(16, 2.0, 3.0);
    const NodalField v = testing::affine(spec.mesh(), Vec2(1.0, 0.0));
    const auto g = boundary_values(spec.mesh(), [](const Point& x) { return x.x() * x.y(); });
    const ExpansionReport rep = expansion_error(spec, v, LimitSchedule::small_epsilon());
    for (double e : rep.errors) CHECK(e <= 10 * spec.newton_tol);
    CHECK(I_direct(spec, v, g) == 0.0);
    const double noise = 10 * spec.newton_tol * std::pow(0.025, 1.0 - 3.0);
    CHECK(std::abs(I_limit(spec, v, g, LimitSchedule::small_epsilon()).value) <= noise);
  }

  TEST_CASE("expansion error decreases") {
    const ProblemSpec spec = testing::bump_spec(32, 2.0, 3.0);
    const ExpansionReport rep =
        expansion_error(spec, testing::affine(spec.mesh(), Vec2(1.0, 0.0)), LimitSchedule::small_epsilon());
    CHECK(rep.passed);
    CHECK(rep.fitted_order > 0.5);
    const ProblemSpec swapped = testing::bump_spec(32, 3.0, 2.0);
    CHECK(expansion_error(swapped, testing::affine(swapped.mesh(), Vec2(1.0, 0.0)), LimitSchedule::large_mu()).passed);
  }

  TEST_CASE("I_limit against I_direct") {
    const ProblemSpec spec = testing::bump_spec(32, 2.0, 3.0);
    const NodalField v = testing::affine(spec.mesh(), Vec2(1.0, 0.0));
    const auto g = boundary_values(spec.mesh(), [](const Point& x) { return x.x() * x.y(); });
    const LimitEstimate est = I_limit(spec, v, g, LimitSchedule::small_epsilon());
    const double direct = I_direct(spec, v, g);
    CHECK(testing::rel(est.value, direct) <= 0.02);
    const LimitEstimate twice = I_limit(spec, v, 2.0 * g, LimitSchedule::small_epsilon());
    CHECK(testing::rel(twice.value, 2.0 * est.value) <= 1e-8);
  }

  TEST_CASE("I_direct closed form for a constant coefficient") {
    const double c = 0.4, q = 3.0;
    const ProblemSpec spec = testing::make_spec(16, 2.0, q, c);
    const Vec2 z(0.6, 0.8);
    const NodalField v = testing::affine(spec.mesh(), z);
    // omega = x y: int grad omega = (int y, int x) = (1/2, 1/2).
    const auto g = boundary_values(spec.mesh(), [](const Point& x) { return x.x() * x.y(); });
    CHECK(std::abs(I_direct(spec, v, g) - c * z.dot(Vec2(0.5, 0.5))) <= 1e-12);
  }

  TEST_CASE("p-harmonic family") {
    const ProblemSpec spec = testing::make_spec(16, 2.0, 3.0);
    const NodalField v0 = testing::affine(spec.mesh(), Vec2(0.6, 0.8));
    const auto phi = boundary_values(spec.mesh(), [](const Point& x) { return x.x() * x.x() - x.y() * x.y(); });
    CHECK(max_abs(vtau_solution(spec, v0, phi, 0.0).solution.u - v0) <= 1e-10);
    const double tau = 0.1;
    CHECK(max_abs(vtau_solution(spec, v0, phi, tau).solution.u - v0 - tau * harmonic_extension(phi)) <= 1e-10);
  }

  TEST_CASE("derivative of I") {
    const ProblemSpec zero = testing::make_spec(16, 2.0, 3.0);
    const NodalField v = testing::affine(zero.mesh(), Vec2(1.0, 0.0));
    const auto g = boundary_values(zero.mesh(), [](const Point& x) { return x.x() * x.y(); });
    const auto h = boundary_values(zero.mesh(), [](const Point& x) { return x.x() * x.x() - x.y() * x.y(); });
    const auto sched = LimitSchedule::small_epsilon();
    CHECK(std::abs(J_fd(zero, v, g, h, 1e-2, sched).value) <= 1e-4);
    CHECK(J_direct(zero, v, solve_V(2.0, v, g), solve_V(2.0, v, h)) == 0.0);

    const ProblemSpec spec = testing::bump_spec(32, 2.0, 3.0);
    const NodalField vb = testing::affine(spec.mesh(), Vec2(1.0, 0.0));
    const auto gb = boundary_values(spec.mesh(), [](const Point& x) { return x.x() * x.y(); });
    const auto hb = boundary_values(spec.mesh(), [](const Point& x) { return x.x() * x.x() - x.y() * x.y(); });
    const std::vector<BoundaryData> both{hb, 3.0 * hb};
    const auto fd = J_fd(spec, vb, gb, both, 1e-2, sched);
    CHECK(testing::rel(fd[1].value, 3.0 * fd[0].value) <= 1e-6);
    const NodalField V1 = solve_V(2.0, vb, gb), V2 = solve_V(2.0, vb, hb);
    const double direct = J_direct(spec, vb, V1, V2);
    CHECK(testing::rel(fd[0].value, direct) <= 0.05);
    CHECK(testing::rel(J_explicit(spec, vb, V1, V2), direct) <= 1e-3);
  }

  TEST_CASE("degenerate families are reported") {
    const ProblemSpec spec = testing::make_spec(8, 2.0, 3.0);
    const NodalField v0 = testing::affine(spec.mesh(), Vec2(1.0, 0.0));
    const auto phi = boundary_values(spec.mesh(), [](const Point& x) { return -x.x(); });
    CHECK(vtau_solution(spec, v0, phi, 1.0).degenerate);
    CHECK_THROWS_AS(J_fd(spec, v0, phi, phi, 1.0, LimitSchedule::small_epsilon()), DomainError);
  }
}
