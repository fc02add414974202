#pragma once

#include <array>
#include <functional>
#include <memory>

#include <Eigen/Sparse>

#include "dpinv/mesh.hpp"

namespace dpinv {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Systems with fewer unknowns than this are factorized directly.
inline constexpr std::size_t kDirectSolveLimit = 10000;

/// Symmetric positive-definite solver: sparse LDL^T below kDirectSolveLimit
/// unknowns, Jacobi-preconditioned conjugate gradients above.
class SpdSolver {
 public:
  SpdSolver();
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  /// Symbolic analysis; later factorize() calls must keep the pattern.
  void analyze(const SparseMatrix& k);
  /// Throws EllipticityError if the direct factorization hits a nonpositive pivot.
  void factorize(const SparseMatrix& k);
  /// rel_tol only applies to the iterative branch. Throws SolverError when
  /// conjugate gradients stalls.
  Vector solve(const Vector& rhs, double rel_tol = 1e-13) const;

  bool is_direct() const { return direct_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  bool direct_ = true;
};

/// Element matrix in the node order of Mesh::triangles()[e].
using LocalMatrix = Eigen::Matrix3d;

/// Assembles sum_e K_e restricted to interior-interior and interior-boundary
/// blocks.
struct SplitMatrix {
  SparseMatrix interior;   // n_int x n_int
  SparseMatrix coupling;   // n_int x n_bnd
};

SplitMatrix assemble_split(const Mesh& mesh,
                           const std::function<LocalMatrix(std::size_t)>& element_matrix);

/// Local stiffness area * grad(phi_i) . A grad(phi_j) for a constant matrix on e.
LocalMatrix local_stiffness(const Mesh& mesh, std::size_t e, const Mat2& a);

/// Interior components of a nodal vector, and back.
Vector restrict_interior(const Mesh& mesh, const std::vector<double>& nodal);
Vector restrict_boundary(const BoundaryData& g);

}  // namespace dpinv
