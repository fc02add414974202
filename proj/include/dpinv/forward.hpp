#pragma once

#include <optional>
#include <vector>

#include "dpinv/errors.hpp"
#include "dpinv/mesh.hpp"
#include "dpinv/problem.hpp"

namespace dpinv {

struct Solution {
  NodalField u;
  /// Double phase energy int (|grad u|^p + (p/q) a |grad u|^q), delta-regularized.
  double energy = 0.0;
  /// Relative dual residual (see weak_residual).
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Newton ran out of iterations; carries the last iterate.
class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, Solution last)
      : SolverError(what, last.iterations, last.residual), last_(std::move(last)) {}
  const Solution& last() const { return last_; }

 private:
  Solution last_;
};

/// int (rho^(p/2) + (p/q) a rho^(q/2)) with rho = |grad u|^2 + delta^2.
double energy(const ProblemSpec& spec, const NodalField& u);

/// ||r|| / ||s|| over interior nodes, where r_i = int F(grad u) . grad phi_i is
/// the discrete weak residual of the (regularized) equation and s_i sums the
/// absolute values of the same element contributions. Zero for constant u.
double weak_residual(const ProblemSpec& spec, const NodalField& u);

/// Discrete flux F(grad u) = (|grad u|^(p-2) + a |grad u|^(q-2)) grad u per
/// element, regularized by spec.delta.
ElementVectors discrete_flux(const ProblemSpec& spec, const NodalField& u);

/// Minimizes the regularized energy over fields equal to f on the boundary by
/// damped Newton with Armijo backtracking and delta continuation. A supplied
/// initial guess skips the continuation and starts at spec.delta.
/// Throws ConvergenceError after max_iters, SolverError on NaN.
Solution solve_dirichlet(const ProblemSpec& spec, const BoundaryData& f,
                         const NodalField* initial_guess = nullptr);

/// p-Laplace solve (a = 0) with the controls of spec.
Solution solve_plaplace(const ProblemSpec& spec, const BoundaryData& f,
                        const NodalField* initial_guess = nullptr);

struct PrinciplesReport {
  /// max over both solves of ||u||_inf - ||f||_inf.
  double max_principle_slack = 0.0;
  /// min(u1 - u2); nonnegative when comparison holds.
  double comparison_slack = 0.0;
  /// min over the bump battery of energy(u1 + phi) - energy(u1).
  double local_min_slack = 0.0;
  int bumps_tested = 0;
  Solution u1;
  Solution u2;
};

/// Solves for f1 >= f2 and reports the maximum/comparison principle slacks and
/// the energy change under interior bump perturbations of u1. Throws
/// InvalidArgument if f1 < f2 at some boundary node.
PrinciplesReport verify_principles(const ProblemSpec& spec, const BoundaryData& f1,
                                   const BoundaryData& f2);

}  // namespace dpinv
