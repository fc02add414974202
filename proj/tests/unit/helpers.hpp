#pragma once

#include <cmath>
#include <numbers>

#include "dpinv/mesh.hpp"
#include "dpinv/problem.hpp"
#include "dpinv/reconstruct.hpp"

namespace testing {

inline dpinv::ProblemSpec make_spec(int n, double p, double q, double a_const = 0.0) {
  dpinv::ProblemSpec spec;
  spec.exponents = {p, q};
  spec.a = dpinv::NodalField(dpinv::build_mesh(n, n), a_const);
  return spec;
}

inline dpinv::ProblemSpec bump_spec(int n, double p, double q) {
  dpinv::ProblemSpec spec = make_spec(n, p, q);
  const dpinv::GaussianBump bump;
  spec.a = dpinv::interpolate(spec.mesh(), [&](const dpinv::Point& x) { return bump(x); });
  return spec;
}

inline dpinv::NodalField affine(const dpinv::MeshPtr& mesh, const dpinv::Vec2& z, double c = 0.0) {
  return dpinv::interpolate(mesh, [&](const dpinv::Point& x) { return c + z.dot(x); });
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
