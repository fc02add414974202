#include "dpinv/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dpinv/dn_map.hpp"
#include "dpinv/parallel.hpp"

namespace dpinv {

namespace {

/// Discrete p-harmonicity check for probes fed to the limit routines.
void require_p_harmonic(const ProblemSpec& spec, const NodalField& v) {
  const ProblemSpec plap = spec.without_coefficient();
  const double res = weak_residual(plap, v);
  const double tol = std::max(1e3 * spec.newton_tol, 1e-8);
  if (!(res <= tol)) {
    std::ostringstream os;
    os << "probe is not discrete p-harmonic (relative residual " << res << ")";
    throw InvalidArgument(os.str());
  }
}

void require_regime(const ProblemSpec& spec, const LimitSchedule& schedule) {
  schedule.validate();
  const bool small = spec.p() < spec.q();
  if (small != schedule.decreasing())
    throw InvalidArgument(small ? "p < q needs a decreasing (epsilon) schedule"
                                : "p > q needs an increasing (mu) schedule");
}

std::vector<NodalField> extensions(std::span<const BoundaryData> gs) {
  std::vector<NodalField> out;
  if (gs.empty()) return out;
  const MeshPtr& mesh = gs.front().mesh;
  EllipticOperator lap(mesh, MatrixField(mesh->num_elements(), Mat2::Identity()));
  out.reserve(gs.size());
  for (const auto& g : gs) out.push_back(lap.solve(g));
  return out;
}

}  // namespace

// Schedules

void LimitSchedule::validate() const {
  if (values.size() < 3) throw InvalidArgument("limit schedule needs at least three values");
  for (double v : values)
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("schedule values must be positive");
  const double r = values[1] / values[0];
  if (std::abs(r - 1.0) < 1e-12) throw InvalidArgument("schedule ratio must differ from one");
  for (std::size_t k = 1; k < values.size(); ++k)
    if (std::abs(values[k] / values[k - 1] - r) > 1e-9 * r)
      throw InvalidArgument("schedule must be geometric");
  if (extrapolation_order < 0) throw InvalidArgument("extrapolation order must be nonnegative");
}

double LimitSchedule::refinement_ratio() const {
  const double r = values[1] / values[0];
  return r < 1.0 ? 1.0 / r : r;
}

LimitSchedule LimitSchedule::small_epsilon(int n) {
  LimitSchedule s;
  for (int k = 0; k < n; ++k) s.values.push_back(0.2 * std::ldexp(1.0, -k));
  return s;
}

LimitSchedule LimitSchedule::large_mu(int n) {
  LimitSchedule s;
  for (int k = 0; k < n; ++k) s.values.push_back(5.0 * std::ldexp(1.0, k));
  return s;
}

LimitSchedule LimitSchedule::for_exponents(const ExponentPair& e, int n) {
  return e.p < e.q ? small_epsilon(n) : large_mu(n);
}

// Expansion

ExpansionReport expansion_error(const ProblemSpec& spec, const NodalField& v,
                                const LimitSchedule& schedule) {
  spec.validate();
  require_regime(spec, schedule);
  require_p_harmonic(spec, v);
  const NodalField r = solve_R(spec, v);
  const double power = 1.0 + spec.q() - spec.p();

  ExpansionReport rep;
  rep.schedule = schedule.values;
  rep.errors.resize(schedule.values.size());
  parallel_for(schedule.values.size(), [&](std::size_t k) {
    const double s = schedule.values[k];
    const double sp = std::pow(s, power);
    NodalField guess = s * v + sp * r;
    const Solution sol = solve_dirichlet(spec, BoundaryData::trace(s * v), &guess);
    NodalField rem = sol.u - s * v - sp * r;
    rep.errors[k] = l2_norm(rem) / sp;
  });

  rep.passed = true;
  for (std::size_t k = 1; k < rep.errors.size(); ++k)
    if (!(rep.errors[k] < rep.errors[k - 1])) rep.passed = false;

  // Least-squares slope of log e against log h, h = s or 1/s.
  const bool dec = schedule.decreasing();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rep.errors.size());
  for (std::size_t k = 0; k < rep.errors.size(); ++k) {
    const double x = std::log(dec ? rep.schedule[k] : 1.0 / rep.schedule[k]);
    const double y = std::log(std::max(rep.errors[k], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rep;
}

// Extrapolation

LimitEstimate richardson(std::span<const double> values, double ratio, int order,
                         double nominal_order) {
  LimitEstimate est;
  est.sequence.assign(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) {
    est.flagged = true;
    return est;
  }
  for (double v : values)
    if (!std::isfinite(v)) est.flagged = true;
  if (n < 3 || order == 0) {
    est.value = values.back();
    est.error_bar = n > 1 ? std::abs(values[n - 1] - values[n - 2]) : 0.0;
    est.fitted_order = nominal_order;
    est.flagged = true;
    return est;
  }

  // Successive differences must keep one sign and shrink.
  for (std::size_t k = 2; k < n; ++k) {
    const double d_prev = values[k - 1] - values[k - 2];
    const double d = values[k] - values[k - 1];
    if (!(d_prev * d > 0.0) || !(std::abs(d) < std::abs(d_prev))) est.flagged = true;
  }

  // The table runs in multiples of the nominal order; the fitted order only
  // confirms it (a three-point fit makes the first two levels coincide).
  const double d1 = values[n - 2] - values[n - 3];
  const double d2 = values[n - 1] - values[n - 2];
  double fitted = nominal_order;
  if (d1 * d2 > 0.0 && std::abs(d1) > std::abs(d2))
    fitted = std::log(d1 / d2) / std::log(ratio);
  else
    est.flagged = true;
  double gamma = nominal_order;
  if (!std::isfinite(fitted) || fitted <= 0.0) {
    fitted = nominal_order;
    est.flagged = true;
  } else if (std::abs(fitted - nominal_order) > 0.25 * nominal_order) {
    gamma = fitted;
    est.flagged = true;
  }
  est.fitted_order = fitted;

  const int levels = std::min<int>(order, static_cast<int>(n) - 1);
  std::vector<double> prev(values.begin(), values.end());
  std::vector<double> cur(n);
  double last_prev_level = prev[n - 1];
  for (int j = 1; j <= levels; ++j) {
    const double factor = std::pow(ratio, j * gamma) - 1.0;
    for (std::size_t k = static_cast<std::size_t>(j); k < n; ++k)
      cur[k] = prev[k] + (prev[k] - prev[k - 1]) / factor;
    last_prev_level = prev[n - 1];
    prev = cur;
  }
  est.value = prev[n - 1];
  est.error_bar = std::abs(prev[n - 1] - last_prev_level);
  return est;
}

// I(v, g)

std::vector<LimitEstimate> I_limit(const ProblemSpec& spec, const NodalField& v,
                                   std::span<const BoundaryData> gs,
                                   const LimitSchedule& schedule) {
  spec.validate();
  require_regime(spec, schedule);
  require_p_harmonic(spec, v);
  const Mesh& mesh = *spec.mesh();
  const std::vector<NodalField> omegas = extensions(gs);
  std::vector<ElementVectors> grad_omega;
  for (const auto& w : omegas) grad_omega.push_back(gradient(w));

  const ProblemSpec plap = spec.without_coefficient();
  const ElementVectors flux0 = discrete_flux(plap, v);
  NodalField r(spec.mesh(), 0.0);
  try {
    r = solve_R(spec, v);
  } catch (const DomainError&) {
    // Warm start only; the forward solve does not need it.
  }

  const double p = spec.p(), q = spec.q();
  const std::size_t ns = schedule.values.size();
  std::vector<std::vector<double>> scaled(gs.size(), std::vector<double>(ns));
  parallel_for(ns, [&](std::size_t k) {
    const double s = schedule.values[k];
    NodalField guess = s * v + std::pow(s, 1.0 + q - p) * r;
    const Solution sol = solve_dirichlet(spec, BoundaryData::trace(s * v), &guess);
    const ElementVectors flux = discrete_flux(spec, sol.u);
    const double lead = std::pow(s, p - 1.0);
    const double norm = std::pow(s, 1.0 - q);
    for (std::size_t j = 0; j < gs.size(); ++j) {
      double acc = 0.0;
      for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        acc += mesh.area(e) * (flux[e] - lead * flux0[e]).dot(grad_omega[j][e]);
      scaled[j][k] = norm * acc;
    }
  });

  std::vector<LimitEstimate> out;
  out.reserve(gs.size());
  for (std::size_t j = 0; j < gs.size(); ++j)
    out.push_back(richardson(scaled[j], schedule.refinement_ratio(), schedule.extrapolation_order,
                             std::abs(q - p)));
  return out;
}

LimitEstimate I_limit(const ProblemSpec& spec, const NodalField& v, const BoundaryData& g,
                      const LimitSchedule& schedule) {
  return I_limit(spec, v, std::span<const BoundaryData>(&g, 1), schedule).front();
}

double I_direct(const ProblemSpec& spec, const NodalField& v, const BoundaryData& g) {
  const Mesh& mesh = *spec.mesh();
  const NodalField r = solve_R(spec, v);
  const NodalField omega = harmonic_extension(g);
  const ElementVectors gv = gradient(v);
  const ElementVectors gr = gradient(r);
  const ElementVectors gw = gradient(omega);
  const MatrixField ap = a_matrix(spec.p(), gv);
  const std::vector<double> abar = spec.element_coefficient();
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    s += mesh.area(e) * (ap[e] * gr[e] + abar[e] * flux(spec.q(), gv[e]).value).dot(gw[e]);
  return s;
}

// p-harmonic families

TauSolution vtau_solution(const ProblemSpec& spec, const NodalField& v0, const BoundaryData& phi,
                          double tau, const NodalField* tangent_guess) {
  const ProblemSpec plap = spec.without_coefficient();
  const BoundaryData data = BoundaryData::trace(v0) + tau * phi;
  NodalField guess = tangent_guess ? v0 + tau * (*tangent_guess) : v0 + tau * harmonic_extension(phi);
  TauSolution out{solve_dirichlet(plap, data, &guess), 0.0, false};
  const ElementVectors g = gradient(out.solution.u);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& x : g) {
    lo = std::min(lo, x.norm());
    hi = std::max(hi, x.norm());
  }
  out.min_gradient = lo;
  out.degenerate = !(lo > 1e-3 * hi);
  return out;
}

namespace {

std::vector<LimitEstimate> central_difference(const ProblemSpec& spec, const NodalField& v0,
                                              const BoundaryData& phi1,
                                              std::span<const BoundaryData> phi2s, double tau,
                                              const LimitSchedule& schedule,
                                              const NodalField& tangent) {
  const TauSolution plus = vtau_solution(spec, v0, phi1, tau, &tangent);
  const TauSolution minus = vtau_solution(spec, v0, phi1, -tau, &tangent);
  if (plus.degenerate || minus.degenerate) {
    std::ostringstream os;
    os << "v_tau develops a near-critical point at tau = " << tau
       << " (min |grad| = " << std::min(plus.min_gradient, minus.min_gradient) << ")";
    throw DomainError(os.str());
  }
  const auto ip = I_limit(spec, plus.solution.u, phi2s, schedule);
  const auto im = I_limit(spec, minus.solution.u, phi2s, schedule);
  std::vector<LimitEstimate> out(phi2s.size());
  for (std::size_t j = 0; j < phi2s.size(); ++j) {
    out[j].value = (ip[j].value - im[j].value) / (2.0 * tau);
    out[j].error_bar = (ip[j].error_bar + im[j].error_bar) / (2.0 * std::abs(tau));
    out[j].fitted_order = ip[j].fitted_order;
    out[j].flagged = ip[j].flagged || im[j].flagged;
    for (std::size_t k = 0; k < ip[j].sequence.size(); ++k)
      out[j].sequence.push_back((ip[j].sequence[k] - im[j].sequence[k]) / (2.0 * tau));
  }
  return out;
}

}  // namespace

std::vector<LimitEstimate> J_fd(const ProblemSpec& spec, const NodalField& v0,
                                const BoundaryData& phi1, std::span<const BoundaryData> phi2s,
                                double tau, const LimitSchedule& schedule) {
  if (!(tau != 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be nonzero");
  const NodalField tangent = solve_V(spec.p(), v0, phi1);
  return central_difference(spec, v0, phi1, phi2s, tau, schedule, tangent);
}

LimitEstimate J_fd(const ProblemSpec& spec, const NodalField& v0, const BoundaryData& phi1,
                   const BoundaryData& phi2, double tau, const LimitSchedule& schedule) {
  return J_fd(spec, v0, phi1, std::span<const BoundaryData>(&phi2, 1), tau, schedule).front();
}

std::vector<DerivativeEstimate> J_fd_checked(const ProblemSpec& spec, const NodalField& v0,
                                             const BoundaryData& phi1,
                                             std::span<const BoundaryData> phi2s, double tau,
                                             const LimitSchedule& schedule) {
  if (!(tau != 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be nonzero");
  const NodalField tangent = solve_V(spec.p(), v0, phi1);
  const auto full = central_difference(spec, v0, phi1, phi2s, tau, schedule, tangent);
  const auto half = central_difference(spec, v0, phi1, phi2s, 0.5 * tau, schedule, tangent);
  std::vector<DerivativeEstimate> out(phi2s.size());
  for (std::size_t j = 0; j < phi2s.size(); ++j) {
    auto& d = out[j];
    d.at_tau = full[j].value;
    d.at_half_tau = half[j].value;
    const double gap = std::abs(d.at_tau - d.at_half_tau);
    d.value = (4.0 * d.at_half_tau - d.at_tau) / 3.0;
    d.error_bar = (4.0 * half[j].error_bar + full[j].error_bar) / 3.0 + gap / 3.0;
    d.consistent =
        gap <= std::max(full[j].error_bar + half[j].error_bar, 0.05 * std::abs(d.at_half_tau));
    d.flagged = full[j].flagged || half[j].flagged;
  }
  return out;
}

// Closed forms of J

Complex J_direct(const ProblemSpec& spec, const NodalField& v0, const ComplexNodalField& V1,
                 const ComplexNodalField& V2) {
  const Mesh& mesh = *spec.mesh();
  const NodalField r = solve_R(spec, v0);
  const ElementVectors g0 = gradient(v0);
  const ElementVectors gr = gradient(r);
  const ElementVectors u1 = gradient(V1.re), w1 = gradient(V1.im);
  const ElementVectors u2 = gradient(V2.re), w2 = gradient(V2.im);
  const MatrixField aq = a_matrix(spec.q(), g0);
  const std::vector<double> abar = spec.element_coefficient();
  const Complex I(0.0, 1.0);
  Complex s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const CVec2 gv1 = u1[e].cast<Complex>() + I * w1[e].cast<Complex>();
    const CVec2 gv2 = u2[e].cast<Complex>() + I * w2[e].cast<Complex>();
    const Eigen::Matrix2cd adot = a_dot_at(spec.p(), g0[e], gv1);
    const Complex term_a = abar[e] * (aq[e].cast<Complex>() * gv1).transpose() * gv2;
    const Complex term_r = gr[e].cast<Complex>().transpose() * (adot * gv2);
    s += mesh.area(e) * (term_a + term_r);
  }
  return s;
}

double J_direct(const ProblemSpec& spec, const NodalField& v0, const NodalField& V1,
                const NodalField& V2) {
  const NodalField zero(spec.mesh(), 0.0);
  return J_direct(spec, v0, ComplexNodalField(V1, zero), ComplexNodalField(V2, zero)).real();
}

Complex J_direct(const ProblemSpec& spec, const NodalField& v0, const NodalField& r_v0,
                 const GradientFn& grad_V1, const GradientFn& grad_V2, const TriangleRule& rule) {
  const Mesh& mesh = *spec.mesh();
  const ElementVectors g0 = gradient(v0);
  const ElementVectors gr = gradient(r_v0);
  const MatrixField aq = a_matrix(spec.q(), g0);
  Complex s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::Matrix2cd aqc = aq[e].cast<Complex>();
    const CVec2 grc = gr[e].cast<Complex>();
    Complex local = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const Point x = mesh.map(e, rule.bary[k]);
      const double a = spec.a.at(e, rule.bary[k]);
      const CVec2 gv1 = grad_V1(x);
      const CVec2 gv2 = grad_V2(x);
      const Complex term_a = a * ((aqc * gv1).transpose() * gv2)(0, 0);
      const Complex term_r = (grc.transpose() * (a_dot_at(spec.p(), g0[e], gv1) * gv2))(0, 0);
      local += rule.weights[k] * (term_a + term_r);
    }
    s += mesh.area(e) * local;
  }
  return s;
}

double J_explicit(const ProblemSpec& spec, const NodalField& v0, const NodalField& V,
                  const NodalField& omega) {
  const Mesh& mesh = *spec.mesh();
  const NodalField r = solve_R(spec, v0);
  const NodalField rdot = solve_Rdot(spec, v0, V, r);
  const ElementVectors g0 = gradient(v0);
  const ElementVectors gV = gradient(V);
  const ElementVectors gr = gradient(r);
  const ElementVectors grd = gradient(rdot);
  const ElementVectors gw = gradient(omega);
  const MatrixField ap = a_matrix(spec.p(), g0);
  const MatrixField aq = a_matrix(spec.q(), g0);
  const MatrixField adot = a_dot(spec.p(), g0, gV);
  const std::vector<double> abar = spec.element_coefficient();
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    s += mesh.area(e) * (adot[e] * gr[e] + ap[e] * grd[e] + abar[e] * (aq[e] * gV[e])).dot(gw[e]);
  return s;
}

}  // namespace dpinv
