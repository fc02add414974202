#include <doctest.h>

#include <random>

#include "dpinv/errors.hpp"
#include "dpinv/tensorops.hpp"
#include "helpers.hpp"

using namespace dpinv;

namespace {

std::vector<std::optional<FrequencySample>> constant_samples(const FrequencyLattice& lat,
                                                             const std::function<Complex(const Vec2&)>& f) {
  std::vector<std::optional<FrequencySample>> out(lat.size());
  for (int k2 = -lat.kmax; k2 <= lat.kmax; ++k2)
    for (int k1 = -lat.kmax; k1 <= lat.kmax; ++k1) {
      FrequencySample s;
      s.xi = lat.frequency(k1, k2);
      s.a_hat = f(s.xi);
      out[lat.index(k1, k2)] = s;
    }
  return out;
}

}  // namespace

TEST_SUITE("reconstruct") {
  TEST_CASE("probe geometry") {
    const FrequencySample s = cgo_data(2.0, Vec2(1.0, 0.0));
    CHECK((s.z - Vec2(0.0, 1.0)).norm() <= 1e-15);
    const Complex d = (s.zeta_plus.transpose() * s.zeta_plus)(0, 0);
    CHECK(std::abs(d) <= 1e-15);
    for (double p : {1.5, 2.0, 3.7}) {
      const FrequencySample t = cgo_data(p, Vec2(-3.0, 7.5));
      const Eigen::Matrix2cd a = flux_jacobian(p, t.z).cast<Complex>();
      CHECK(std::abs((t.zeta_plus.transpose() * a * t.zeta_plus)(0, 0)) <= 1e-12);
      CHECK(std::abs((t.zeta_minus.transpose() * a * t.zeta_minus)(0, 0)) <= 1e-12);
      const Point x(0.3, 0.9);
      CHECK(std::abs(cgo_value(t.zeta_plus, x) * cgo_value(t.zeta_minus, x) - std::polar(1.0, t.xi.dot(x))) <= 1e-14);
    }
    CHECK_THROWS_AS(cgo_data(2.0, Vec2::Zero()), InvalidArgument);
  }

  TEST_CASE("lattice") {
    FrequencyLattice lat;
    CHECK(lat.size() == 289);
    CHECK(lat.spacing() == doctest::Approx(std::numbers::pi));
    CHECK(lat.half().size() == 144);
    CHECK(lat.index(-8, -8) == 0);
    CHECK(lat.index(8, 8) == 288);
    lat.box = Domain{0.0, 1.0, 0.0, 2.0};
    CHECK_THROWS_AS(lat.validate(), InvalidArgument);
  }

  TEST_CASE("zero coefficient gives zero transform") {
    const ProblemSpec spec = testing::make_spec(16, 2.0, 3.0);
    const FrequencySample s = a_hat(spec, cgo_data(2.0, Vec2(std::numbers::pi, 0.0)), SampleMode::oracle);
    CHECK(std::abs(s.a_hat) == 0.0);
    PipelineSettings ps;
    ps.schedule = LimitSchedule::small_epsilon();
    const FrequencySample t = a_hat(spec, cgo_data(2.0, Vec2(std::numbers::pi, 0.0)), SampleMode::pipeline, ps);
    CHECK(std::abs(t.a_hat) <= 1e-3);
  }

  TEST_CASE("oracle transform of the bump") {
    const ProblemSpec spec = testing::bump_spec(64, 2.0, 3.0);
    for (const Vec2& xi : {Vec2(std::numbers::pi, 0.0), Vec2(-2 * std::numbers::pi, 5 * std::numbers::pi)}) {
      const FrequencySample s = a_hat(spec, cgo_data(2.0, xi), SampleMode::oracle);
      const Complex ref = quadrature_transform(spec.a, xi);
      CHECK(std::abs(s.a_hat - ref) <= 0.01 * std::abs(ref));
      const FrequencySample m = a_hat(spec, cgo_data(2.0, -xi), SampleMode::oracle);
      CHECK(std::abs(m.a_hat - std::conj(s.a_hat)) <= 1e-10 * std::abs(ref));
    }
  }

  TEST_CASE("quadrature transform of a constant") {
    const MeshPtr m = build_mesh(8, 8);
    const Vec2 xi(2.0, -3.0);
    const Complex exact = (std::exp(Complex(0, xi.x())) - 1.0) / Complex(0, xi.x()) *
                          (std::exp(Complex(0, xi.y())) - 1.0) / Complex(0, xi.y());
    CHECK(std::abs(quadrature_transform(NodalField(m, 1.0), xi) - exact) <= 1e-12);
  }

  TEST_CASE("inversion") {
    const FrequencyLattice lat;
    const MeshPtr m = build_mesh(16, 16);
    const auto zero = invert(constant_samples(lat, [](const Vec2&) { return Complex(0.0); }), lat, m);
    CHECK(max_abs(zero.a_rec) == 0.0);

    auto missing = constant_samples(lat, [](const Vec2&) { return Complex(1.0); });
    missing[lat.index(3, -2)].reset();
    CHECK_THROWS_WITH_AS(invert(missing, lat, m), doctest::Contains("(3,-2)"), InvalidArgument);

    // Constant patch [0.25, 0.75]^2 with value 2. The patch mean of the
    // truncated series is 2 M^2 with M = sum |c_k|^2 / (0.5 L) over the 1D
    // coefficients c_k of the unit patch (Parseval).
    const auto side = [](double w) {
      return std::abs(w) < 1e-14 ? Complex(0.5) : (std::exp(Complex(0, 0.75 * w)) - std::exp(Complex(0, 0.25 * w))) / Complex(0, w);
    };
    const auto patch = constant_samples(lat, [&](const Vec2& xi) { return 2.0 * side(xi.x()) * side(xi.y()); });
    double m1 = 0.0;
    for (int k = -lat.kmax; k <= lat.kmax; ++k) m1 += std::norm(side(k * lat.spacing()));
    m1 /= 0.5 * 2.0;
    const MeshPtr fine = build_mesh(64, 64);
    const auto rec = invert(patch, lat, fine);
    std::vector<double> inside(fine->num_elements(), 0.0);
    for (std::size_t e = 0; e < inside.size(); ++e) {
      const Point c = fine->centroid(e);
      if (c.x() > 0.25 && c.x() < 0.75 && c.y() > 0.25 && c.y() < 0.75) {
        const auto& t = fine->triangles()[e];
        inside[e] = (rec.a_rec[t[0]] + rec.a_rec[t[1]] + rec.a_rec[t[2]]) / 3.0;
      }
    }
    const double mean = integrate(*fine, inside) / 0.25;
    CHECK(std::abs(mean - 2.0 * m1 * m1) <= 0.01 * 2.0);
    CHECK(std::abs(mean - 2.0) <= 0.12 * 2.0);
    CHECK(rec.imaginary_residue <= 1e-12);
  }

  TEST_CASE("DC estimate of a Gaussian") {
    FrequencyLattice lat;
    const GaussianBump bump;
    std::vector<Complex> values(lat.size());
    for (int k2 = -lat.kmax; k2 <= lat.kmax; ++k2)
      for (int k1 = -lat.kmax; k1 <= lat.kmax; ++k1)
        if (k1 || k2) values[lat.index(k1, k2)] = bump.transform(lat.frequency(k1, k2));
    const double exact = std::numbers::pi / bump.width;
    CHECK(std::abs(dc_estimate(lat, values).real() - exact) <= 0.02 * exact);
  }

  TEST_CASE("metrics") {
    const MeshPtr m = build_mesh(32, 32);
    const FrequencyLattice lat;
    ReconstructionResult r;
    r.lattice = lat;
    r.a_rec = interpolate(m, [](const Point& x) { return std::cos(x.x()) + x.y(); });
    const NodalField truth = r.a_rec;
    CHECK(metrics(r, truth).relative_l2 == 0.0);
    CHECK(metrics(r, truth).max_node_error == 0.0);
    const NodalField unit = (1.0 / l2_norm(truth)) * truth;
    r.a_rec = unit + NodalField(m, 0.1);
    CHECK(metrics(r, unit).relative_l2 == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(metrics(r, unit).max_node_error == doctest::Approx(0.1).epsilon(1e-12));
  }

  TEST_CASE("Gaussian bump transform") {
    const GaussianBump bump;
    const MeshPtr m = build_mesh(64, 64);
    const NodalField a = interpolate(m, [&](const Point& x) { return bump(x); });
    const Vec2 xi(3.0, -1.0);
    CHECK(std::abs(quadrature_transform(a, xi) - bump.transform(xi)) <= 1e-2 * std::abs(bump.transform(xi)));
    CHECK(bump(Point(-0.5, -0.5)) == 0.0);
  }
}
