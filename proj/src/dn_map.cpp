#include "dpinv/dn_map.hpp"

#include <cmath>

#include "dpinv/linear_elliptic.hpp"

namespace dpinv {

namespace {

NodalField resolve_extension(const BoundaryData& g, const std::optional<NodalField>& omega) {
  if (!omega) return harmonic_extension(g);
  if (omega->mesh().get() != g.mesh.get()) throw InvalidArgument("extension on a different mesh");
  const double tol = 1e-12 * std::max(g.max_abs(), 1.0);
  const auto& bn = g.mesh->boundary_nodes();
  for (std::size_t k = 0; k < bn.size(); ++k)
    if (std::abs((*omega)[bn[k]] - g.values[k]) > tol)
      throw InvalidArgument("extension does not match the boundary data");
  return *omega;
}

}  // namespace

double pairing(const ProblemSpec& spec, const NodalField& u, const NodalField& omega) {
  const Mesh& mesh = *spec.mesh();
  if (u.mesh().get() != &mesh || omega.mesh().get() != &mesh)
    throw InvalidArgument("pairing: fields on different meshes");
  const ElementVectors flux = discrete_flux(spec, u);
  const ElementVectors gw = gradient(omega);
  double s = 0.0;
  for (std::size_t e = 0; e < flux.size(); ++e) s += mesh.area(e) * flux[e].dot(gw[e]);
  return s;
}

double pairing(const DNQuery& query) {
  const NodalField omega = resolve_extension(query.g, query.omega);
  const Solution sol = solve_dirichlet(query.spec, query.f);
  return pairing(query.spec, sol.u, omega);
}

std::shared_ptr<const Solution> PLaplaceCache::get(const ProblemSpec& spec, const BoundaryData& f) {
  Key key{spec.p(), spec.delta, spec.mesh().get(), f.values};
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto sol = std::make_shared<const Solution>(solve_plaplace(spec, f));
  std::lock_guard lock(mutex_);
  return entries_.emplace(std::move(key), std::move(sol)).first->second;
}

std::size_t PLaplaceCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

double pairing_plap(const ProblemSpec& spec, const BoundaryData& f, const BoundaryData& g,
                    double scale, PLaplaceCache& cache) {
  const ProblemSpec plap = spec.without_coefficient();
  const auto sol = cache.get(plap, f);
  const NodalField omega = harmonic_extension(g);
  const double base = pairing(plap, sol->u, omega);
  // Odd (p-1)-homogeneity of the p-Laplace flux.
  const double factor = std::copysign(std::pow(std::abs(scale), spec.p() - 1.0), scale);
  return factor * base;
}

}  // namespace dpinv
