#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dpinv/forward.hpp"
#include "dpinv/linear_elliptic.hpp"
#include "dpinv/problem.hpp"

namespace dpinv {

/// Geometric sequence of boundary-data scales: decreasing (epsilon -> 0, for
/// p < q) or increasing (mu -> infinity, for p > q).
struct LimitSchedule {
  std::vector<double> values;
  int extrapolation_order = 3;

  /// Throws InvalidArgument unless there are at least three positive values
  /// with a constant ratio different from one.
  void validate() const;
  bool decreasing() const { return values.size() > 1 && values[1] < values[0]; }
  /// Ratio > 1 between consecutive small parameters (s or 1/s).
  double refinement_ratio() const;

  /// epsilon_k = 0.2 * 2^-k, k = 0..n-1.
  static LimitSchedule small_epsilon(int n = 4);
  /// mu_k = 5 * 2^k, k = 0..n-1.
  static LimitSchedule large_mu(int n = 4);
  /// small_epsilon for p < q, large_mu for p > q.
  static LimitSchedule for_exponents(const ExponentPair& e, int n = 4);
};

/// Normalized remainder of u_s = s v + s^(1+q-p) R_v + o(s^(1+q-p)).
struct ExpansionReport {
  std::vector<double> schedule;
  /// e(s) = ||u_s - s v - s^(1+q-p) R_v||_L2 / s^(1+q-p)
  std::vector<double> errors;
  /// Slope of log e against log of the small parameter (s or 1/s).
  double fitted_order = 0.0;
  /// e strictly decreasing along the schedule.
  bool passed = false;
};

/// Throws InvalidArgument if the schedule direction does not match the
/// exponent regime or v is not a discrete p-harmonic field.
ExpansionReport expansion_error(const ProblemSpec& spec, const NodalField& v,
                                const LimitSchedule& schedule);

/// Extrapolated limit of a sequence, with an error bar.
struct LimitEstimate {
  double value = 0.0;
  /// Difference of the two most refined extrapolants.
  double error_bar = 0.0;
  /// Empirical algebraic order of the remainder.
  double fitted_order = 0.0;
  /// Set when the sequence is not monotone enough to trust the extrapolation.
  bool flagged = false;
  std::vector<double> sequence;
};

/// Richardson extrapolation of values[k] ~ L + c h_k^gamma + ..., with
/// h_{k+1} = h_k / ratio, eliminating orders gamma, 2 gamma, ... The order is
/// also fitted from the last three values; gamma = nominal_order when the fit
/// lies within 25% of it, otherwise the fitted order is used and the result
/// is flagged.
LimitEstimate richardson(std::span<const double> values, double ratio, int order,
                         double nominal_order);

/// I(v, g) = lim s^(1-q) (<Lambda_a s v, g> - <Lambda_0 s v, g>) from forward
/// solves along the schedule. The Lambda_0 term uses (p-1)-homogeneity of
/// the p-Laplacian on v itself, so v must be discrete p-harmonic.
LimitEstimate I_limit(const ProblemSpec& spec, const NodalField& v, const BoundaryData& g,
                      const LimitSchedule& schedule);

/// Several g at once, sharing the forward solves.
std::vector<LimitEstimate> I_limit(const ProblemSpec& spec, const NodalField& v,
                                   std::span<const BoundaryData> gs,
                                   const LimitSchedule& schedule);

/// Closed form int (A^p_v grad R_v + a J^q(grad v)) . grad omega, with omega
/// the harmonic extension of g.
double I_direct(const ProblemSpec& spec, const NodalField& v, const BoundaryData& g);

struct TauSolution {
  Solution solution;
  /// min_T |grad v_tau| on the mesh.
  double min_gradient = 0.0;
  /// min_T |grad v_tau| fell below 1e-3 of max_T |grad v_tau|.
  bool degenerate = false;
};

/// p-harmonic function with boundary data v0 + tau * phi (a = 0 in spec).
TauSolution vtau_solution(const ProblemSpec& spec, const NodalField& v0, const BoundaryData& phi,
                          double tau, const NodalField* tangent_guess = nullptr);

/// Central difference (I(v_tau, g) - I(v_-tau, g)) / (2 tau), g = phi2.
/// Throws DomainError if either v_{+-tau} degenerates.
LimitEstimate J_fd(const ProblemSpec& spec, const NodalField& v0, const BoundaryData& phi1,
                   const BoundaryData& phi2, double tau, const LimitSchedule& schedule);

/// Several phi2 at once.
std::vector<LimitEstimate> J_fd(const ProblemSpec& spec, const NodalField& v0,
                                const BoundaryData& phi1, std::span<const BoundaryData> phi2s,
                                double tau, const LimitSchedule& schedule);

/// J_fd at tau and tau/2 combined: value is the O(tau^4) Richardson
/// combination, error bar adds the tau-truncation estimate.
struct DerivativeEstimate {
  double value = 0.0;
  double error_bar = 0.0;
  double at_tau = 0.0;
  double at_half_tau = 0.0;
  /// The two step sizes agree within their extrapolation error bars or 5%.
  bool consistent = true;
  bool flagged = false;
};

std::vector<DerivativeEstimate> J_fd_checked(const ProblemSpec& spec, const NodalField& v0,
                                             const BoundaryData& phi1,
                                             std::span<const BoundaryData> phi2s, double tau,
                                             const LimitSchedule& schedule);

/// int (a A^q_{v0} grad V1 . grad V2 + grad R_{v0} . Adot(V1) grad V2), the
/// integrated-by-parts form of J, bilinear (no conjugation) in complex fields.
Complex J_direct(const ProblemSpec& spec, const NodalField& v0, const ComplexNodalField& V1,
                 const ComplexNodalField& V2);
double J_direct(const ProblemSpec& spec, const NodalField& v0, const NodalField& V1,
                const NodalField& V2);

/// Same form for probes given analytically by their gradients, evaluated at
/// the points of `rule` with a interpolated from its nodal values. R_{v0} is
/// passed in so callers can reuse it across probes.
using GradientFn = std::function<CVec2(const Point&)>;
Complex J_direct(const ProblemSpec& spec, const NodalField& v0, const NodalField& r_v0,
                 const GradientFn& grad_V1, const GradientFn& grad_V2, const TriangleRule& rule);

/// Pre-integration-by-parts form
/// int (Adot(V) grad R_{v0} + A^p grad Rdot + a A^q grad V) . grad omega.
double J_explicit(const ProblemSpec& spec, const NodalField& v0, const NodalField& V,
                  const NodalField& omega);

}  // namespace dpinv
