#include <doctest.h>

#include "dpinv/dn_map.hpp"
#include "dpinv/linear_elliptic.hpp"
#include "helpers.hpp"

using namespace dpinv;

TEST_SUITE("dn_map") {
  TEST_CASE("Dirichlet energy at p = 2") {
    const ProblemSpec spec = testing::make_spec(16, 2.0, 3.0);
    const auto f = boundary_values(spec.mesh(), [](const Point& x) { return x.x() * x.y(); });
    const Solution u = solve_dirichlet(spec, f);
    const double val = pairing(DNQuery{spec, f, f, std::nullopt});
    double dirichlet = 0.0;
    const auto g = gradient(u.u);
    for (std::size_t e = 0; e < g.size(); ++e) dirichlet += spec.mesh()->area(e) * g[e].squaredNorm();
    CHECK(val >= 0.0);
    CHECK(testing::rel(val, dirichlet) <= 1e-9);
  }

  TEST_CASE("plane wave pairing") {
    const ProblemSpec spec = testing::make_spec(16, 3.0, 2.0);
    const auto f = boundary_values(spec.mesh(), [](const Point& x) { return 0.6 * x.x() + 0.8 * x.y(); });
    CHECK(std::abs(pairing(DNQuery{spec, f, f, std::nullopt}) - 1.0) <= 1e-9);
  }

  TEST_CASE("extension independence and linearity in g") {
    const ProblemSpec spec = testing::bump_spec(24, 2.5, 3.5);
    const auto f = boundary_values(spec.mesh(), [](const Point& x) { return x.x() + 0.2 * x.y() * x.y(); });
    const auto g = boundary_values(spec.mesh(), [](const Point& x) { return std::sin(2.0 * x.x()) + x.y(); });
    const auto h = boundary_values(spec.mesh(), [](const Point& x) { return x.x() * x.y(); });
    const double p1 = pairing(DNQuery{spec, f, g, std::nullopt});
    NodalField other = lift(g);
    for (std::size_t i : spec.mesh()->interior_nodes()) other[i] = std::cos(static_cast<double>(i));
    const double p2 = pairing(DNQuery{spec, f, g, other});
    CHECK(std::abs(p1 - p2) <= 10 * spec.newton_tol * std::max(1.0, std::abs(p1)));
    const double ph = pairing(DNQuery{spec, f, h, std::nullopt});
    const double pgh = pairing(DNQuery{spec, f, 2.0 * g + h, std::nullopt});
    CHECK(std::abs(pgh - 2.0 * p1 - ph) <= 1e-10 * std::max(1.0, std::abs(pgh)));
  }

  TEST_CASE("monotone in the coefficient") {
    const ProblemSpec low = testing::bump_spec(16, 2.0, 3.0);
    ProblemSpec high = low;
    high.a = low.a + NodalField(low.mesh(), 0.3);
    const auto f = boundary_values(low.mesh(), [](const Point& x) { return std::cos(2.0 * x.x()) + x.y(); });
    const double pl = pairing(DNQuery{low, f, f, std::nullopt});
    const double ph = pairing(DNQuery{high, f, f, std::nullopt});
    CHECK(ph >= pl - 1e-9);
    const auto c = boundary_values(low.mesh(), [](const Point&) { return 2.0; });
    CHECK(std::abs(pairing(DNQuery{low, c, c, std::nullopt})) <= 1e-12);
  }

  TEST_CASE("p-Laplace shortcut") {
    ProblemSpec spec = testing::make_spec(16, 3.0, 2.0);
    spec.newton_tol = 1e-12;
    const auto f = boundary_values(spec.mesh(), [](const Point& x) { return x.x() + 0.3 * x.x() * x.y(); });
    const auto g = boundary_values(spec.mesh(), [](const Point& x) { return x.y(); });
    PLaplaceCache cache;
    const double one = pairing_plap(spec, f, g, 1.0, cache);
    CHECK(std::abs(one - pairing(DNQuery{spec, f, g, std::nullopt})) <= 1e-12 * std::abs(one));
    CHECK(std::abs(pairing_plap(spec, f, g, 2.0, cache) - 4.0 * one) <= 1e-12 * std::abs(one));
    CHECK(cache.size() == 1);
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      const double direct = pairing(DNQuery{spec, eps * f, g, std::nullopt});
      CHECK(std::abs(pairing_plap(spec, f, g, eps, cache) - direct) <= 10 * spec.newton_tol * std::max(std::abs(direct), eps * eps));
    }
  }
}
