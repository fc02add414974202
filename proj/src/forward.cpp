#include "dpinv/forward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dpinv/linalg.hpp"
#include "dpinv/linear_elliptic.hpp"

namespace dpinv {

namespace {

constexpr double kArmijoSlope = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr double kStageTol = 1e-6;

/// Regularized energy density (1/p) rho^(p/2) + (1/q) a rho^(q/2) and its
/// derivatives in the gradient variable.
class Density {
 public:
  Density(double p, double q, double delta) : p_(p), q_(q), d2_(delta * delta) {}

  double value(const Vec2& g, double a) const {
    const double rho = g.squaredNorm() + d2_;
    double v = std::pow(rho, 0.5 * p_) / p_;
    if (a != 0.0) v += a * std::pow(rho, 0.5 * q_) / q_;
    return v;
  }

  /// kappa with F = kappa * g.
  double kappa(const Vec2& g, double a) const {
    const double rho = g.squaredNorm() + d2_;
    if (rho == 0.0) return 0.0;
    double k = std::pow(rho, 0.5 * (p_ - 2.0));
    if (a != 0.0) k += a * std::pow(rho, 0.5 * (q_ - 2.0));
    return k;
  }

  /// Hessian kappa I + 2 kappa' g g^T.
  Mat2 hessian(const Vec2& g, double a) const {
    const double rho = g.squaredNorm() + d2_;
    if (rho == 0.0) return Mat2::Identity() * (p_ >= 2.0 ? 0.0 : 1.0);
    double k = std::pow(rho, 0.5 * (p_ - 2.0));
    double dk = 0.5 * (p_ - 2.0) * std::pow(rho, 0.5 * (p_ - 4.0));
    if (a != 0.0) {
      k += a * std::pow(rho, 0.5 * (q_ - 2.0));
      dk += a * 0.5 * (q_ - 2.0) * std::pow(rho, 0.5 * (q_ - 4.0));
    }
    return k * Mat2::Identity() + 2.0 * dk * g * g.transpose();
  }

  void set_delta(double delta) { d2_ = delta * delta; }

 private:
  double p_, q_, d2_;
};

struct Residual {
  Vector r;       // interior weak residual
  double scale;   // ||s||
};

class Minimizer {
 public:
  Minimizer(const ProblemSpec& spec)
      : spec_(spec),
        mesh_(*spec.mesh()),
        abar_(spec.element_coefficient()),
        density_(spec.p(), spec.q(), spec.delta) {}

  void set_delta(double d) { density_.set_delta(d); }

  double objective(const NodalField& u) const {
    const ElementVectors g = gradient(u);
    double s = 0.0;
    for (std::size_t e = 0; e < g.size(); ++e) s += mesh_.area(e) * density_.value(g[e], abar_[e]);
    return s;
  }

  Residual residual(const NodalField& u) const {
    const ElementVectors g = gradient(u);
    const auto ni = static_cast<Eigen::Index>(mesh_.interior_nodes().size());
    Vector r = Vector::Zero(ni);
    Vector s = Vector::Zero(ni);
    for (std::size_t e = 0; e < g.size(); ++e) {
      const Vec2 f = density_.kappa(g[e], abar_[e]) * g[e];
      const auto& t = mesh_.triangles()[e];
      const auto& bg = mesh_.basis_gradients(e);
      for (int a = 0; a < 3; ++a) {
        const long i = mesh_.interior_index(t[a]);
        if (i < 0) continue;
        const double c = mesh_.area(e) * f.dot(bg[a]);
        r[i] += c;
        s[i] += std::abs(c);
      }
    }
    return {std::move(r), s.norm()};
  }

  static double relative(const Residual& res) {
    if (res.r.size() == 0) return 0.0;
    const double rn = res.r.norm();
    if (res.scale == 0.0) return rn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return rn / res.scale;
  }

  SparseMatrix hessian(const NodalField& u) const {
    const ElementVectors g = gradient(u);
    return assemble_split(mesh_, [&](std::size_t e) {
             return local_stiffness(mesh_, e, density_.hessian(g[e], abar_[e]));
           })
        .interior;
  }

  /// Runs Newton at the current delta until the relative residual drops
  /// below tol. Returns false on iteration exhaustion.
  bool newton(NodalField& u, double tol, int max_iters, int& iterations, bool polish,
              double& last_residual) {
    const auto& in = mesh_.interior_nodes();
    Residual res = residual(u);
    double rel = relative(res);
    double obj = objective(u);
    bool analyzed = false;
    bool polished = !polish;
    for (int it = 0; it < max_iters; ++it) {
      if (!std::isfinite(rel) || !std::isfinite(obj)) {
        last_residual = rel;
        throw SolverError("NaN or infinity in Newton iteration", iterations, rel);
      }
      if (rel <= tol) {
        if (polished) {
          last_residual = rel;
          return true;
        }
        polished = true;
      }
      const SparseMatrix h = hessian(u);
      if (!analyzed) {
        solver_.analyze(h);
        analyzed = true;
      }
      Vector dir;
      bool newton_dir = true;
      try {
        solver_.factorize(h);
        dir = -solver_.solve(res.r, std::min(1e-2, std::max(rel, 1e-14)) * 1e-2);
      } catch (const std::exception&) {
        newton_dir = false;
      }
      double slope = newton_dir ? res.r.dot(dir) : 0.0;
      if (!newton_dir || !(slope < 0.0)) {
        // Jacobi-scaled gradient step.
        dir.resize(res.r.size());
        for (Eigen::Index i = 0; i < dir.size(); ++i) {
          const double d = h.coeff(i, i);
          dir[i] = -res.r[i] / (d > 0.0 ? d : 1.0);
        }
        slope = res.r.dot(dir);
      }

      double t = 1.0;
      NodalField trial = u;
      double trial_obj = obj;
      const double slack = 1e-15 * (std::abs(obj) + 1e-300) * std::sqrt(double(in.size()) + 1.0);
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        for (std::size_t k = 0; k < in.size(); ++k)
          trial[in[k]] = u[in[k]] + t * dir[static_cast<Eigen::Index>(k)];
        trial_obj = objective(trial);
        if (std::isfinite(trial_obj) && trial_obj <= obj + kArmijoSlope * t * slope + slack) {
          accepted = true;
          break;
        }
        t *= kBacktrack;
      }
      ++iterations;
      if (!accepted) {
        // No representable decrease left; the iterate is as good as roundoff allows.
        last_residual = rel;
        return rel <= tol;
      }
      Residual trial_res = residual(trial);
      const double trial_rel = relative(trial_res);
      if (polished && rel <= tol && trial_rel > rel) {
        last_residual = rel;
        return true;
      }
      u = std::move(trial);
      obj = trial_obj;
      res = std::move(trial_res);
      rel = trial_rel;
    }
    last_residual = rel;
    return rel <= tol && polished;
  }

 private:
  const ProblemSpec& spec_;
  const Mesh& mesh_;
  std::vector<double> abar_;
  Density density_;
  SpdSolver solver_;
};

double gradient_scale(const NodalField& u) {
  const ElementVectors g = gradient(u);
  const Mesh& m = *u.mesh();
  double s = 0.0, area = 0.0;
  for (std::size_t e = 0; e < g.size(); ++e) {
    s += m.area(e) * g[e].squaredNorm();
    area += m.area(e);
  }
  return std::sqrt(s / area);
}

}  // namespace

double energy(const ProblemSpec& spec, const NodalField& u) {
  const Mesh& mesh = *spec.mesh();
  if (u.mesh().get() != &mesh) throw InvalidArgument("energy: field on a different mesh");
  const ElementVectors g = gradient(u);
  const std::vector<double> abar = spec.element_coefficient();
  const double p = spec.p(), q = spec.q(), d2 = spec.delta * spec.delta;
  double s = 0.0;
  for (std::size_t e = 0; e < g.size(); ++e) {
    const double rho = g[e].squaredNorm() + d2;
    s += mesh.area(e) * (std::pow(rho, 0.5 * p) + (p / q) * abar[e] * std::pow(rho, 0.5 * q));
  }
  return s;
}

ElementVectors discrete_flux(const ProblemSpec& spec, const NodalField& u) {
  const ElementVectors g = gradient(u);
  const std::vector<double> abar = spec.element_coefficient();
  const Density density(spec.p(), spec.q(), spec.delta);
  ElementVectors f(g.size());
  for (std::size_t e = 0; e < g.size(); ++e) f[e] = density.kappa(g[e], abar[e]) * g[e];
  return f;
}

double weak_residual(const ProblemSpec& spec, const NodalField& u) {
  if (u.mesh().get() != spec.mesh().get()) throw InvalidArgument("weak_residual: mesh mismatch");
  Minimizer m(spec);
  return Minimizer::relative(m.residual(u));
}

Solution solve_dirichlet(const ProblemSpec& spec, const BoundaryData& f,
                         const NodalField* initial_guess) {
  spec.validate();
  if (f.mesh.get() != spec.mesh().get()) throw InvalidArgument("boundary data on a different mesh");
  for (double v : f.values)
    if (!std::isfinite(v)) throw InvalidArgument("boundary data is not finite");

  NodalField u = initial_guess ? *initial_guess : harmonic_extension(f);
  impose(u, f);

  std::vector<double> deltas;
  if (initial_guess || spec.continuation_steps <= 1) {
    deltas.push_back(spec.delta);
  } else {
    const double scale = std::max(gradient_scale(u), 1e-300);
    const double start = 0.1 * scale;
    const double stop = std::max(spec.delta, 1e-8 * scale);
    const int n = spec.continuation_steps;
    if (start <= stop) {
      deltas.push_back(spec.delta);
    } else {
      for (int k = 0; k < n - 1; ++k)
        deltas.push_back(start * std::pow(stop / start, double(k) / double(n - 1)));
      deltas.push_back(spec.delta);
    }
  }

  Minimizer minimizer(spec);
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const bool last = k + 1 == deltas.size();
    minimizer.set_delta(deltas[k]);
    const double tol = last ? spec.newton_tol : std::max(kStageTol, spec.newton_tol);
    converged = minimizer.newton(u, tol, spec.max_iters, iterations, last, residual);
    if (!converged && last) break;
  }

  Solution sol{u, energy(spec, u), weak_residual(spec, u), iterations, converged};
  if (!converged) {
    std::ostringstream os;
    os << "Newton did not reach residual " << spec.newton_tol << " (last " << sol.residual
       << ") after " << iterations << " iterations";
    throw ConvergenceError(os.str(), std::move(sol));
  }
  return sol;
}

Solution solve_plaplace(const ProblemSpec& spec, const BoundaryData& f,
                        const NodalField* initial_guess) {
  return solve_dirichlet(spec.without_coefficient(), f, initial_guess);
}

PrinciplesReport verify_principles(const ProblemSpec& spec, const BoundaryData& f1,
                                   const BoundaryData& f2) {
  if (f1.values.size() != f2.values.size()) throw InvalidArgument("boundary data size mismatch");
  for (std::size_t k = 0; k < f1.values.size(); ++k) {
    if (f1.values[k] < f2.values[k]) {
      std::ostringstream os;
      os << "comparison requires f1 >= f2; violated at boundary node "
         << f1.mesh->boundary_nodes()[k];
      throw InvalidArgument(os.str());
    }
  }
  PrinciplesReport rep;
  rep.u1 = solve_dirichlet(spec, f1);
  rep.u2 = solve_dirichlet(spec, f2);

  rep.max_principle_slack = std::max(max_abs(rep.u1.u) - f1.max_abs(), max_abs(rep.u2.u) - f2.max_abs());
  rep.comparison_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rep.u1.u.size(); ++i)
    rep.comparison_slack = std::min(rep.comparison_slack, rep.u1.u[i] - rep.u2.u[i]);

  // Hat-function bumps at a deterministic spread of interior nodes.
  const Mesh& mesh = *spec.mesh();
  const auto& in = mesh.interior_nodes();
  const double amp_scale = std::max(f1.max_abs(), 1e-3);
  const std::size_t stride = std::max<std::size_t>(1, in.size() / 8);
  rep.local_min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < in.size(); k += stride) {
    for (double amp : {1e-2, -1e-2, 1e-4, -1e-4}) {
      NodalField w = rep.u1.u;
      w[in[k]] += amp * amp_scale;
      rep.local_min_slack = std::min(rep.local_min_slack, energy(spec, w) - rep.u1.energy);
      ++rep.bumps_tested;
    }
  }
  if (in.empty()) rep.local_min_slack = 0.0;
  return rep;
}

}  // namespace dpinv
