#pragma once

#include <vector>

#include "dpinv/mesh.hpp"
#include "dpinv/tensorops.hpp"

namespace dpinv {

/// One instance of the double phase Dirichlet problem
///   div(|grad u|^(p-2) grad u + a |grad u|^(q-2) grad u) = 0,
/// together with the discretization and solver controls.
struct ProblemSpec {
  ExponentPair exponents;
  /// Nonnegative coefficient, P1 on the working mesh.
  NodalField a;
  /// Final regularization |grad u|^2 -> |grad u|^2 + delta^2.
  double delta = 1e-8;
  /// Relative dual residual at which Newton stops.
  double newton_tol = 1e-10;
  int max_iters = 200;
  /// Number of geometric delta stages (including the final one).
  int continuation_steps = 4;

  const MeshPtr& mesh() const { return a.mesh(); }
  double p() const { return exponents.p; }
  double q() const { return exponents.q; }

  /// Throws InvalidArgument on a negative coefficient, bad exponents or tolerances.
  void validate() const;

  /// Element averages of a (exact for the P1 coefficient).
  std::vector<double> element_coefficient() const;

  /// Same spec with a replaced by zero (the p-Laplace reference problem).
  ProblemSpec without_coefficient() const;
};

}  // namespace dpinv
