#include "dpinv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dpinv/errors.hpp"

namespace dpinv {

void Domain::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max) || !std::isfinite(x_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_min) || !std::isfinite(y_max)) {
    std::ostringstream os;
    os << "degenerate domain [" << x_min << ", " << x_max << "] x [" << y_min << ", " << y_max
       << "]";
    throw InvalidArgument(os.str());
  }
}

bool Domain::contains(const Point& x, double tol) const {
  return x.x() >= x_min - tol && x.x() <= x_max + tol && x.y() >= y_min - tol &&
         x.y() <= y_max + tol;
}

const TriangleRule& TriangleRule::centroid() {
  static const TriangleRule rule{{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}, {1.0}};
  return rule;
}

const TriangleRule& TriangleRule::three_point() {
  static const TriangleRule rule{{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}},
                                 {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  return rule;
}

const TriangleRule& TriangleRule::seven_point() {
  // Dunavant, degree 5.
  static const TriangleRule rule = [] {
    const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    TriangleRule r;
    r.bary = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
              {a1, b1, b1},
              {b1, a1, b1},
              {b1, b1, a1},
              {a2, b2, b2},
              {b2, a2, b2},
              {b2, b2, a2}};
    r.weights = {0.225, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

Mesh::Mesh(int nx, int ny, const Domain& domain) : nx_(nx), ny_(ny), domain_(domain) {
  domain.validate();
  if (nx < 1 || ny < 1) throw InvalidArgument("mesh needs at least one cell per direction");

  const std::size_t nxp = static_cast<std::size_t>(nx) + 1;
  const std::size_t nyp = static_cast<std::size_t>(ny) + 1;
  const double hx = (domain.x_max - domain.x_min) / nx;
  const double hy = (domain.y_max - domain.y_min) / ny;

  nodes_.reserve(nxp * nyp);
  for (std::size_t j = 0; j < nyp; ++j) {
    for (std::size_t i = 0; i < nxp; ++i) {
      // Pin the last row/column to the exact domain edge.
      const double x = (i == nxp - 1) ? domain.x_max : domain.x_min + static_cast<double>(i) * hx;
      const double y = (j == nyp - 1) ? domain.y_max : domain.y_min + static_cast<double>(j) * hy;
      nodes_.emplace_back(x, y);
    }
  }

  triangles_.reserve(2 * static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (std::size_t j = 0; j < static_cast<std::size_t>(ny); ++j) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(nx); ++i) {
      const std::size_t n00 = j * nxp + i;
      const std::size_t n10 = n00 + 1;
      const std::size_t n01 = n00 + nxp;
      const std::size_t n11 = n01 + 1;
      triangles_.push_back({n00, n10, n11});
      triangles_.push_back({n00, n11, n01});
    }
  }

  area_.resize(triangles_.size());
  basis_grad_.resize(triangles_.size());
  for (std::size_t e = 0; e < triangles_.size(); ++e) {
    const auto& t = triangles_[e];
    const Point& p0 = nodes_[t[0]];
    const Point& p1 = nodes_[t[1]];
    const Point& p2 = nodes_[t[2]];
    const double det = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
    area_[e] = 0.5 * det;
    // grad(lambda_k) = rot(p_{k+2} - p_{k+1}) / det
    basis_grad_[e][0] = Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / det;
    basis_grad_[e][1] = Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / det;
    basis_grad_[e][2] = Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / det;
  }

  boundary_index_.assign(nodes_.size(), -1);
  interior_index_.assign(nodes_.size(), -1);
  for (std::size_t j = 0; j < nyp; ++j) {
    for (std::size_t i = 0; i < nxp; ++i) {
      const std::size_t n = j * nxp + i;
      if (i == 0 || j == 0 || i == nxp - 1 || j == nyp - 1) {
        boundary_index_[n] = static_cast<long>(boundary_.size());
        boundary_.push_back(n);
      } else {
        interior_index_[n] = static_cast<long>(interior_.size());
        interior_.push_back(n);
      }
    }
  }
}

double Mesh::h() const {
  return std::max((domain_.x_max - domain_.x_min) / nx_, (domain_.y_max - domain_.y_min) / ny_);
}

Point Mesh::centroid(std::size_t e) const {
  const auto& t = triangles_[e];
  return (nodes_[t[0]] + nodes_[t[1]] + nodes_[t[2]]) / 3.0;
}

Point Mesh::map(std::size_t e, const std::array<double, 3>& bary) const {
  const auto& t = triangles_[e];
  return bary[0] * nodes_[t[0]] + bary[1] * nodes_[t[1]] + bary[2] * nodes_[t[2]];
}

std::vector<Point> Mesh::quadrature_points(const TriangleRule& rule) const {
  std::vector<Point> pts;
  pts.reserve(num_elements() * rule.size());
  for (std::size_t e = 0; e < num_elements(); ++e)
    for (const auto& b : rule.bary) pts.push_back(map(e, b));
  return pts;
}

MeshPtr build_mesh(int nx, int ny, const Domain& domain) {
  return std::make_shared<const Mesh>(nx, ny, domain);
}

// NodalField

NodalField::NodalField(MeshPtr mesh, double fill)
    : mesh_(std::move(mesh)), values_(mesh_ ? mesh_->num_nodes() : 0, fill) {}

NodalField::NodalField(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_ || values_.size() != mesh_->num_nodes())
    throw InvalidArgument("nodal field length does not match the mesh");
}

double NodalField::at(std::size_t e, const std::array<double, 3>& bary) const {
  const auto& t = mesh_->triangles()[e];
  return bary[0] * values_[t[0]] + bary[1] * values_[t[1]] + bary[2] * values_[t[2]];
}

namespace {
void require_same_mesh(const MeshPtr& a, const MeshPtr& b) {
  if (a.get() != b.get()) throw InvalidArgument("fields live on different meshes");
}
}  // namespace

NodalField& NodalField::operator+=(const NodalField& o) {
  require_same_mesh(mesh_, o.mesh_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

NodalField& NodalField::operator-=(const NodalField& o) {
  require_same_mesh(mesh_, o.mesh_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

NodalField& NodalField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

NodalField operator+(NodalField a, const NodalField& b) { return a += b; }
NodalField operator-(NodalField a, const NodalField& b) { return a -= b; }
NodalField operator*(double s, NodalField a) { return a *= s; }

ComplexNodalField::ComplexNodalField(NodalField re_part, NodalField im_part)
    : re(std::move(re_part)), im(std::move(im_part)) {
  require_same_mesh(re.mesh(), im.mesh());
}

// BoundaryData

BoundaryData::BoundaryData(MeshPtr m, std::vector<double> v)
    : mesh(std::move(m)), values(std::move(v)) {
  if (!mesh || values.size() != mesh->boundary_nodes().size())
    throw InvalidArgument("boundary data length does not match the mesh boundary");
}

BoundaryData BoundaryData::trace(const NodalField& u) {
  const auto& bn = u.mesh()->boundary_nodes();
  std::vector<double> v(bn.size());
  for (std::size_t k = 0; k < bn.size(); ++k) v[k] = u[bn[k]];
  return {u.mesh(), std::move(v)};
}

double BoundaryData::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

BoundaryData& BoundaryData::operator+=(const BoundaryData& o) {
  require_same_mesh(mesh, o.mesh);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  return *this;
}

BoundaryData& BoundaryData::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

BoundaryData operator+(BoundaryData a, const BoundaryData& b) { return a += b; }
BoundaryData operator-(BoundaryData a, const BoundaryData& b) { return a += (-1.0) * b; }
BoundaryData operator*(double s, BoundaryData a) { return a *= s; }

BoundaryData ComplexBoundaryData::real() const {
  std::vector<double> v(values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values[i].real();
  return {mesh, std::move(v)};
}

BoundaryData ComplexBoundaryData::imag() const {
  std::vector<double> v(values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values[i].imag();
  return {mesh, std::move(v)};
}

// Calculus

ElementVectors gradient(const NodalField& u) {
  const Mesh& mesh = *u.mesh();
  ElementVectors g(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.triangles()[e];
    const auto& bg = mesh.basis_gradients(e);
    g[e] = u[t[0]] * bg[0] + u[t[1]] * bg[1] + u[t[2]] * bg[2];
  }
  return g;
}

namespace {
template <class T>
T integrate_impl(const Mesh& mesh, std::span<const T> g, const TriangleRule& rule) {
  const std::size_t nq = rule.size();
  if (g.size() != mesh.num_elements() * nq)
    throw InvalidArgument("integrand length does not match elements x quadrature points");
  T sum{};
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    T local{};
    for (std::size_t q = 0; q < nq; ++q) local += rule.weights[q] * g[e * nq + q];
    sum += mesh.area(e) * local;
  }
  return sum;
}

template <class T>
T integrate_auto(const Mesh& mesh, std::span<const T> g) {
  if (g.size() == mesh.num_elements()) return integrate_impl(mesh, g, TriangleRule::centroid());
  if (g.size() == 3 * mesh.num_elements())
    return integrate_impl(mesh, g, TriangleRule::three_point());
  throw InvalidArgument("integrand needs one or three values per element");
}
}  // namespace

double integrate(const Mesh& mesh, std::span<const double> g) { return integrate_auto(mesh, g); }
Complex integrate(const Mesh& mesh, std::span<const Complex> g) { return integrate_auto(mesh, g); }

double integrate(const Mesh& mesh, std::span<const double> g, const TriangleRule& rule) {
  return integrate_impl(mesh, g, rule);
}
Complex integrate(const Mesh& mesh, std::span<const Complex> g, const TriangleRule& rule) {
  return integrate_impl(mesh, g, rule);
}

BoundaryData boundary_values(const MeshPtr& mesh, const std::function<double(const Point&)>& f) {
  const auto& bn = mesh->boundary_nodes();
  std::vector<double> v(bn.size());
  for (std::size_t k = 0; k < bn.size(); ++k) v[k] = f(mesh->nodes()[bn[k]]);
  return {mesh, std::move(v)};
}

ComplexBoundaryData complex_boundary_values(const MeshPtr& mesh,
                                    const std::function<Complex(const Point&)>& f) {
  const auto& bn = mesh->boundary_nodes();
  ComplexBoundaryData out{mesh, std::vector<Complex>(bn.size())};
  for (std::size_t k = 0; k < bn.size(); ++k) out.values[k] = f(mesh->nodes()[bn[k]]);
  return out;
}

NodalField interpolate(const MeshPtr& mesh, const std::function<double(const Point&)>& f) {
  std::vector<double> v(mesh->num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(mesh->nodes()[i]);
  return {mesh, std::move(v)};
}

NodalField lift(const BoundaryData& g, double interior) {
  NodalField u(g.mesh, interior);
  impose(u, g);
  return u;
}

void impose(NodalField& u, const BoundaryData& g) {
  require_same_mesh(u.mesh(), g.mesh);
  const auto& bn = g.mesh->boundary_nodes();
  for (std::size_t k = 0; k < bn.size(); ++k) u[bn[k]] = g.values[k];
}

double l2_norm(const NodalField& u) {
  const Mesh& mesh = *u.mesh();
  const auto& rule = TriangleRule::three_point();
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double v = u.at(e, rule.bary[q]);
      local += rule.weights[q] * v * v;
    }
    sum += mesh.area(e) * local;
  }
  return std::sqrt(sum);
}

double l2_error(const NodalField& u, const std::function<double(const Point&)>& exact) {
  const Mesh& mesh = *u.mesh();
  const auto& rule = TriangleRule::seven_point();
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double d = u.at(e, rule.bary[q]) - exact(mesh.map(e, rule.bary[q]));
      local += rule.weights[q] * d * d;
    }
    sum += mesh.area(e) * local;
  }
  return std::sqrt(sum);
}

double max_abs(const NodalField& u) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace dpinv
