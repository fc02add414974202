#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dpinv {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using CVec2 = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2d;
using Complex = std::complex<double>;

/// Axis-aligned rectangle.
struct Domain {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  /// Throws InvalidArgument unless x_min < x_max and y_min < y_max.
  void validate() const;
  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool contains(const Point& x, double tol = 0.0) const;
  bool operator==(const Domain&) const = default;

  static Domain unit_square() { return {}; }
};

/// Quadrature rule on the reference triangle, in barycentric coordinates.
/// Weights sum to one (multiply by the element area).
struct TriangleRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }

  static const TriangleRule& centroid();
  /// Edge-midpoint rule, exact for quadratics.
  static const TriangleRule& three_point();
  /// Seven-point rule, exact for polynomials of degree five.
  static const TriangleRule& seven_point();
};

class Mesh;
using MeshPtr = std::shared_ptr<const Mesh>;

/// Uniform triangulation of a rectangle. Each grid cell is split along its
/// lower-left to upper-right diagonal, so every triangle is right-angled.
/// Node (i, j) has index j * (nx + 1) + i.
class Mesh {
 public:
  using Triangle = std::array<std::size_t, 3>;

  Mesh(int nx, int ny, const Domain& domain);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const Domain& domain() const { return domain_; }
  double h() const;

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_elements() const { return triangles_.size(); }
  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }
  const std::vector<std::size_t>& interior_nodes() const { return interior_; }
  double area(std::size_t e) const { return area_[e]; }
  const std::vector<double>& areas() const { return area_; }

  bool is_boundary(std::size_t node) const { return boundary_index_[node] >= 0; }
  /// Position in boundary_nodes(), or -1 for interior nodes.
  long boundary_index(std::size_t node) const { return boundary_index_[node]; }
  /// Position in interior_nodes(), or -1 for boundary nodes.
  long interior_index(std::size_t node) const { return interior_index_[node]; }

  /// Gradients of the three nodal basis functions on element e.
  const std::array<Vec2, 3>& basis_gradients(std::size_t e) const { return basis_grad_[e]; }

  Point centroid(std::size_t e) const;
  /// Physical location of a barycentric point inside element e.
  Point map(std::size_t e, const std::array<double, 3>& bary) const;

  /// Physical quadrature points, element-major (rule.size() per element).
  std::vector<Point> quadrature_points(const TriangleRule& rule) const;

 private:
  int nx_;
  int ny_;
  Domain domain_;
  std::vector<Point> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<double> area_;
  std::vector<std::array<Vec2, 3>> basis_grad_;
  std::vector<std::size_t> boundary_;
  std::vector<std::size_t> interior_;
  std::vector<long> boundary_index_;
  std::vector<long> interior_index_;
};

/// Builds the uniform nx-by-ny triangulation of domain.
MeshPtr build_mesh(int nx, int ny, const Domain& domain = Domain::unit_square());

/// Piecewise-linear field given by its node values.
class NodalField {
 public:
  NodalField() = default;
  explicit NodalField(MeshPtr mesh, double fill = 0.0);
  NodalField(MeshPtr mesh, std::vector<double> values);

  const MeshPtr& mesh() const { return mesh_; }
  std::size_t size() const { return values_.size(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Value of the interpolant at a barycentric point of element e.
  double at(std::size_t e, const std::array<double, 3>& bary) const;

  NodalField& operator+=(const NodalField& o);
  NodalField& operator-=(const NodalField& o);
  NodalField& operator*=(double s);

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

NodalField operator+(NodalField a, const NodalField& b);
NodalField operator-(NodalField a, const NodalField& b);
NodalField operator*(double s, NodalField a);

/// Complex field stored as two real fields on one mesh.
struct ComplexNodalField {
  NodalField re;
  NodalField im;

  ComplexNodalField() = default;
  ComplexNodalField(NodalField re_part, NodalField im_part);
  const MeshPtr& mesh() const { return re.mesh(); }
  Complex operator[](std::size_t i) const { return {re[i], im[i]}; }
};

/// Dirichlet data: one value per boundary node, in Mesh::boundary_nodes() order.
struct BoundaryData {
  MeshPtr mesh;
  std::vector<double> values;

  BoundaryData() = default;
  BoundaryData(MeshPtr m, std::vector<double> v);

  /// Nodal trace of a field.
  static BoundaryData trace(const NodalField& u);
  double max_abs() const;

  BoundaryData& operator+=(const BoundaryData& o);
  BoundaryData& operator*=(double s);
};

BoundaryData operator+(BoundaryData a, const BoundaryData& b);
BoundaryData operator-(BoundaryData a, const BoundaryData& b);
BoundaryData operator*(double s, BoundaryData a);

struct ComplexBoundaryData {
  MeshPtr mesh;
  std::vector<Complex> values;

  BoundaryData real() const;
  BoundaryData imag() const;
};

// Per-element and per-quadrature-point data.
using ElementVectors = std::vector<Vec2>;
using ElementMatrices = std::vector<Mat2>;

/// Exact elementwise gradient of the P1 interpolant.
ElementVectors gradient(const NodalField& u);

/// Sum of g_T * area_T. g holds one value per element (centroid rule) or
/// three per element (edge-midpoint rule, element-major).
double integrate(const Mesh& mesh, std::span<const double> g);
Complex integrate(const Mesh& mesh, std::span<const Complex> g);

/// Same, for values sampled at the points of an arbitrary rule.
double integrate(const Mesh& mesh, std::span<const double> g, const TriangleRule& rule);
Complex integrate(const Mesh& mesh, std::span<const Complex> g, const TriangleRule& rule);

BoundaryData boundary_values(const MeshPtr& mesh, const std::function<double(const Point&)>& f);
ComplexBoundaryData complex_boundary_values(const MeshPtr& mesh,
                                            const std::function<Complex(const Point&)>& f);

NodalField interpolate(const MeshPtr& mesh, const std::function<double(const Point&)>& f);

/// Field equal to g on the boundary and `interior` elsewhere.
NodalField lift(const BoundaryData& g, double interior = 0.0);
/// Overwrites the boundary values of u with g.
void impose(NodalField& u, const BoundaryData& g);

/// L2 norm of the P1 interpolant (exact).
double l2_norm(const NodalField& u);
/// L2 distance between the interpolant of u and an exact function, using the
/// seven-point rule.
double l2_error(const NodalField& u, const std::function<double(const Point&)>& exact);
double max_abs(const NodalField& u);

}  // namespace dpinv
