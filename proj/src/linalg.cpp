#include "dpinv/linalg.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "dpinv/errors.hpp"

namespace dpinv {

struct SpdSolver::Impl {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  const SparseMatrix* matrix = nullptr;
};

SpdSolver::SpdSolver() : impl_(std::make_unique<Impl>()) {}
SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

void SpdSolver::analyze(const SparseMatrix& k) {
  direct_ = static_cast<std::size_t>(k.rows()) < kDirectSolveLimit;
  if (direct_) impl_->ldlt.analyzePattern(k);
}

void SpdSolver::factorize(const SparseMatrix& k) {
  if (direct_) {
    impl_->ldlt.factorize(k);
    if (impl_->ldlt.info() != Eigen::Success)
      throw EllipticityError(0, "sparse LDL^T factorization failed");
    const auto d = impl_->ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (!(d[i] > 0.0)) throw EllipticityError(0, "matrix is not positive definite");
  } else {
    impl_->cg.compute(k);
    impl_->cg.setMaxIterations(std::max<Eigen::Index>(2000, 4 * k.rows()));
  }
}

Vector SpdSolver::solve(const Vector& rhs, double rel_tol) const {
  if (rhs.size() == 0) return rhs;
  if (direct_) return impl_->ldlt.solve(rhs);
  auto& cg = impl_->cg;
  cg.setTolerance(rel_tol);
  Vector x = cg.solve(rhs);
  if (cg.info() != Eigen::Success)
    throw SolverError("conjugate gradients did not converge", static_cast<int>(cg.iterations()),
                      cg.error());
  return x;
}

SplitMatrix assemble_split(const Mesh& mesh,
                           const std::function<LocalMatrix(std::size_t)>& element_matrix) {
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> ii, ib;
  ii.reserve(mesh.num_elements() * 9);
  ib.reserve(mesh.num_elements() * 3);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.triangles()[e];
    const LocalMatrix k = element_matrix(e);
    for (int a = 0; a < 3; ++a) {
      const long ia = mesh.interior_index(t[a]);
      if (ia < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const long jb = mesh.interior_index(t[b]);
        if (jb >= 0)
          ii.emplace_back(ia, jb, k(a, b));
        else
          ib.emplace_back(ia, mesh.boundary_index(t[b]), k(a, b));
      }
    }
  }
  const auto ni = static_cast<Eigen::Index>(mesh.interior_nodes().size());
  const auto nb = static_cast<Eigen::Index>(mesh.boundary_nodes().size());
  SplitMatrix out{SparseMatrix(ni, ni), SparseMatrix(ni, nb)};
  out.interior.setFromTriplets(ii.begin(), ii.end());
  out.coupling.setFromTriplets(ib.begin(), ib.end());
  return out;
}

LocalMatrix local_stiffness(const Mesh& mesh, std::size_t e, const Mat2& a) {
  const auto& g = mesh.basis_gradients(e);
  LocalMatrix k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k(i, j) = mesh.area(e) * g[i].dot(a * g[j]);
  return k;
}

Vector restrict_interior(const Mesh& mesh, const std::vector<double>& nodal) {
  const auto& in = mesh.interior_nodes();
  Vector v(static_cast<Eigen::Index>(in.size()));
  for (std::size_t k = 0; k < in.size(); ++k) v[static_cast<Eigen::Index>(k)] = nodal[in[k]];
  return v;
}

Vector restrict_boundary(const BoundaryData& g) {
  return Eigen::Map<const Vector>(g.values.data(), static_cast<Eigen::Index>(g.values.size()));
}

}  // namespace dpinv
