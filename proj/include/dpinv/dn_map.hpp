#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <vector>

#include "dpinv/forward.hpp"
#include "dpinv/problem.hpp"

namespace dpinv {

/// <Lambda_a f, g> request. omega, when given, must equal g on the boundary;
/// otherwise the discrete harmonic extension of g is used.
struct DNQuery {
  ProblemSpec spec;
  BoundaryData f;
  BoundaryData g;
  std::optional<NodalField> omega;
};

/// Volume form int F(grad u) . grad omega of the Dirichlet-to-Neumann pairing,
/// where u solves the double phase problem with data f.
double pairing(const DNQuery& query);

/// Same pairing for an already computed solution u.
double pairing(const ProblemSpec& spec, const NodalField& u, const NodalField& omega);

/// Shared p-Laplace solves keyed by (p, delta, mesh, data). Safe for
/// concurrent use; entries are immutable once inserted.
class PLaplaceCache {
 public:
  std::shared_ptr<const Solution> get(const ProblemSpec& spec, const BoundaryData& f);
  std::size_t size() const;

 private:
  using Key = std::tuple<double, double, const Mesh*, std::vector<double>>;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const Solution>> entries_;
};

/// <Lambda_0 (scale f), g> for the p-Laplacian (a = 0), computed as
/// scale^(p-1) <Lambda_0 f, g> from one cached solve.
double pairing_plap(const ProblemSpec& spec, const BoundaryData& f, const BoundaryData& g,
                    double scale, PLaplaceCache& cache);

}  // namespace dpinv
