#pragma once

#include <memory>

#include "dpinv/linalg.hpp"
#include "dpinv/mesh.hpp"
#include "dpinv/problem.hpp"
#include "dpinv/tensorops.hpp"

namespace dpinv {

/// Throws EllipticityError naming the first element where A is not
/// symmetric positive definite.
void check_ellipticity(const MatrixField& a);

/// div(A grad R) = -div F in the domain, R = g on the boundary.
/// The load is always taken weakly: int A grad R . grad phi = -int F . grad phi.
struct LinearProblem {
  MeshPtr mesh;
  MatrixField A;
  ElementVectors F;
  BoundaryData g;

  LinearProblem(MeshPtr m, MatrixField coeff, ElementVectors load, BoundaryData data);
};

/// Assembled and factorized operator for a fixed coefficient field; reusable
/// across loads and boundary data.
class EllipticOperator {
 public:
  EllipticOperator(MeshPtr mesh, MatrixField a);

  const MeshPtr& mesh() const { return mesh_; }
  const MatrixField& coefficient() const { return a_; }

  NodalField solve(const ElementVectors& load, const BoundaryData& g) const;
  /// Homogeneous Dirichlet data.
  NodalField solve(const ElementVectors& load) const;
  /// Zero load.
  NodalField solve(const BoundaryData& g) const;

  /// max_i |int A grad R . grad phi_i + int F . grad phi_i| over interior
  /// basis functions, divided by the largest magnitude among the terms.
  double galerkin_residual(const NodalField& r, const ElementVectors& load) const;

 private:
  MeshPtr mesh_;
  MatrixField a_;
  SplitMatrix k_;
  SpdSolver solver_;
};

NodalField solve_linear(const LinearProblem& problem);

/// Interior load vector -int F . grad phi_i.
Vector flux_load(const Mesh& mesh, const ElementVectors& load);

/// Discrete harmonic extension (A = identity) of boundary data.
NodalField harmonic_extension(const BoundaryData& g);

/// First corrector: div(A^p_v grad R) = -div(a J^q(grad v)), R = 0 on the boundary.
NodalField solve_R(const ProblemSpec& spec, const NodalField& v);

/// Linearized p-Laplace problem div(A^p_{v0} grad V) = 0, V = phi on the boundary.
NodalField solve_V(double p, const NodalField& v0, const BoundaryData& phi);
ComplexNodalField solve_V(double p, const NodalField& v0, const ComplexBoundaryData& phi);

/// Derivative of the corrector along a p-harmonic family with tangent V:
/// div(A^p_{v0} grad Rdot) = -div(Adot(V) grad R_{v0}) - div(a A^q_{v0} grad V).
NodalField solve_Rdot(const ProblemSpec& spec, const NodalField& v0, const NodalField& V,
                      const NodalField& r_v0);

}  // namespace dpinv
