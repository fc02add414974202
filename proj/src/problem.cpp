#include "dpinv/problem.hpp"

#include <cmath>
#include <sstream>

#include "dpinv/errors.hpp"

namespace dpinv {

void ProblemSpec::validate() const {
  exponents.validate();
  if (!a.mesh()) throw InvalidArgument("problem spec has no coefficient field");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] >= 0.0) || !std::isfinite(a[i])) {
      std::ostringstream os;
      os << "coefficient must be finite and nonnegative; node " << i << " has " << a[i];
      throw InvalidArgument(os.str());
    }
  }
  if (!(delta >= 0.0)) throw InvalidArgument("delta must be nonnegative");
  if (!(newton_tol > 0.0)) throw InvalidArgument("newton_tol must be positive");
  if (max_iters < 1) throw InvalidArgument("max_iters must be positive");
  if (continuation_steps < 1) throw InvalidArgument("continuation_steps must be positive");
}

std::vector<double> ProblemSpec::element_coefficient() const {
  const Mesh& m = *mesh();
  std::vector<double> out(m.num_elements());
  for (std::size_t e = 0; e < out.size(); ++e) {
    const auto& t = m.triangles()[e];
    out[e] = (a[t[0]] + a[t[1]] + a[t[2]]) / 3.0;
  }
  return out;
}

ProblemSpec ProblemSpec::without_coefficient() const {
  ProblemSpec s = *this;
  s.a = NodalField(mesh(), 0.0);
  return s;
}

}  // namespace dpinv
