#include "dpinv/linear_elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dpinv/errors.hpp"

namespace dpinv {

void check_ellipticity(const MatrixField& a) {
  for (std::size_t e = 0; e < a.size(); ++e) {
    const Mat2& m = a[e];
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    const bool symmetric = std::abs(m(0, 1) - m(1, 0)) <= 1e-12 * scale;
    const double tr = m.trace();
    const double det = m.determinant();
    if (!symmetric || !(tr > 0.0) || !(det > 0.0) || !std::isfinite(tr)) {
      std::ostringstream os;
      os << "coefficient matrix on element " << e << " is not symmetric positive definite";
      throw EllipticityError(e, os.str());
    }
  }
}

LinearProblem::LinearProblem(MeshPtr m, MatrixField coeff, ElementVectors load, BoundaryData data)
    : mesh(std::move(m)), A(std::move(coeff)), F(std::move(load)), g(std::move(data)) {
  if (A.size() != mesh->num_elements() || F.size() != mesh->num_elements())
    throw InvalidArgument("linear problem: per-element data does not match the mesh");
  if (g.mesh.get() != mesh.get()) throw InvalidArgument("linear problem: boundary data mesh mismatch");
  check_ellipticity(A);
}

EllipticOperator::EllipticOperator(MeshPtr mesh, MatrixField a)
    : mesh_(std::move(mesh)), a_(std::move(a)) {
  if (a_.size() != mesh_->num_elements()) throw InvalidArgument("coefficient field size mismatch");
  check_ellipticity(a_);
  k_ = assemble_split(*mesh_, [&](std::size_t e) { return local_stiffness(*mesh_, e, a_[e]); });
  solver_.analyze(k_.interior);
  solver_.factorize(k_.interior);
}

Vector flux_load(const Mesh& mesh, const ElementVectors& load) {
  if (load.size() != mesh.num_elements()) throw InvalidArgument("load size mismatch");
  Vector b = Vector::Zero(static_cast<Eigen::Index>(mesh.interior_nodes().size()));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.triangles()[e];
    const auto& g = mesh.basis_gradients(e);
    for (int a = 0; a < 3; ++a) {
      const long i = mesh.interior_index(t[a]);
      if (i >= 0) b[i] -= mesh.area(e) * load[e].dot(g[a]);
    }
  }
  return b;
}

NodalField EllipticOperator::solve(const ElementVectors& load, const BoundaryData& g) const {
  const Mesh& mesh = *mesh_;
  Vector rhs = flux_load(mesh, load);
  if (g.mesh.get() != mesh_.get()) throw InvalidArgument("boundary data mesh mismatch");
  rhs -= k_.coupling * restrict_boundary(g);
  const Vector x = solver_.solve(rhs);
  NodalField r = lift(g);
  const auto& in = mesh.interior_nodes();
  for (std::size_t k = 0; k < in.size(); ++k) r[in[k]] = x[static_cast<Eigen::Index>(k)];
  return r;
}

NodalField EllipticOperator::solve(const ElementVectors& load) const {
  return solve(load, BoundaryData(mesh_, std::vector<double>(mesh_->boundary_nodes().size(), 0.0)));
}

NodalField EllipticOperator::solve(const BoundaryData& g) const {
  return solve(ElementVectors(mesh_->num_elements(), Vec2::Zero()), g);
}

double EllipticOperator::galerkin_residual(const NodalField& r, const ElementVectors& load) const {
  const Mesh& mesh = *mesh_;
  const Vector ri = restrict_interior(mesh, r.values());
  const Vector rb = restrict_boundary(BoundaryData::trace(r));
  const Vector stiff = k_.interior * ri;
  const Vector coup = k_.coupling * rb;
  const Vector f = flux_load(mesh, load);
  const Vector res = stiff + coup - f;
  if (res.size() == 0) return 0.0;
  const double scale =
      std::max({stiff.cwiseAbs().maxCoeff(), coup.cwiseAbs().maxCoeff(), f.cwiseAbs().maxCoeff()});
  if (scale == 0.0) return 0.0;
  return res.cwiseAbs().maxCoeff() / scale;
}

NodalField solve_linear(const LinearProblem& problem) {
  EllipticOperator op(problem.mesh, problem.A);
  return op.solve(problem.F, problem.g);
}

NodalField harmonic_extension(const BoundaryData& g) {
  EllipticOperator op(g.mesh, MatrixField(g.mesh->num_elements(), Mat2::Identity()));
  return op.solve(g);
}

NodalField solve_R(const ProblemSpec& spec, const NodalField& v) {
  const ElementVectors gv = gradient(v);
  const std::vector<double> abar = spec.element_coefficient();
  ElementVectors load(gv.size());
  for (std::size_t e = 0; e < gv.size(); ++e) load[e] = abar[e] * flux(spec.q(), gv[e]).value;
  EllipticOperator op(v.mesh(), a_matrix(spec.p(), gv));
  return op.solve(load);
}

NodalField solve_V(double p, const NodalField& v0, const BoundaryData& phi) {
  EllipticOperator op(v0.mesh(), a_matrix(p, gradient(v0)));
  return op.solve(phi);
}

ComplexNodalField solve_V(double p, const NodalField& v0, const ComplexBoundaryData& phi) {
  EllipticOperator op(v0.mesh(), a_matrix(p, gradient(v0)));
  return {op.solve(phi.real()), op.solve(phi.imag())};
}

NodalField solve_Rdot(const ProblemSpec& spec, const NodalField& v0, const NodalField& V,
                      const NodalField& r_v0) {
  const ElementVectors g0 = gradient(v0);
  const ElementVectors gV = gradient(V);
  const ElementVectors gR = gradient(r_v0);
  const MatrixField adot = a_dot(spec.p(), g0, gV);
  const MatrixField aq = a_matrix(spec.q(), g0);
  const std::vector<double> abar = spec.element_coefficient();
  ElementVectors load(g0.size());
  for (std::size_t e = 0; e < g0.size(); ++e)
    load[e] = adot[e] * gR[e] + abar[e] * (aq[e] * gV[e]);
  EllipticOperator op(v0.mesh(), a_matrix(spec.p(), g0));
  return op.solve(load);
}

}  // namespace dpinv
