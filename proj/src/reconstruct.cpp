#include "dpinv/reconstruct.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dpinv/errors.hpp"
#include "dpinv/linear_elliptic.hpp"
#include "dpinv/parallel.hpp"

namespace dpinv {

const char* to_string(SampleMode mode) {
  return mode == SampleMode::pipeline ? "pipeline" : "oracle";
}

// Probe geometry

FrequencySample cgo_data(double p, const Vec2& xi) {
  if (!(p > 1.0)) throw InvalidArgument("p must exceed 1");
  const double norm = xi.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidArgument("frequency must be nonzero");
  FrequencySample s;
  s.xi = xi;
  s.z = Vec2(-xi.y(), xi.x()) / norm;
  const double amp = norm / (2.0 * std::sqrt(p - 1.0));
  const Complex I(0.0, 1.0);
  s.zeta_plus = amp * s.z.cast<Complex>() + I * (0.5 * xi).cast<Complex>();
  s.zeta_minus = -amp * s.z.cast<Complex>() + I * (0.5 * xi).cast<Complex>();
  return s;
}

Complex cgo_value(const CVec2& zeta, const Point& x) {
  return std::exp(zeta(0) * x(0) + zeta(1) * x(1));
}

CVec2 cgo_gradient(const CVec2& zeta, const Point& x) { return cgo_value(zeta, x) * zeta; }

double probe_scale(const Mesh& mesh, const CVec2& zeta) {
  double m = 0.0;
  for (std::size_t n : mesh.boundary_nodes()) m = std::max(m, std::abs(cgo_value(zeta, mesh.nodes()[n])));
  return m;
}

double fourier_factor(const ExponentPair& e, const Vec2& xi) {
  return -4.0 * (e.p - 1.0) / ((e.p + e.q - 2.0) * xi.squaredNorm());
}

// Lattice

void FrequencyLattice::validate() const {
  box.validate();
  const double lx = box.x_max - box.x_min, ly = box.y_max - box.y_min;
  if (std::abs(lx - ly) > 1e-12 * lx) throw InvalidArgument("periodization box must be square");
  if (kmax < 2) throw InvalidArgument("lattice needs kmax >= 2 for the DC estimate");
}

double FrequencyLattice::spacing() const { return 2.0 * std::numbers::pi / (box.x_max - box.x_min); }

Vec2 FrequencyLattice::frequency(int k1, int k2) const { return spacing() * Vec2(k1, k2); }

std::size_t FrequencyLattice::index(int k1, int k2) const {
  return static_cast<std::size_t>(k2 + kmax) * side() + static_cast<std::size_t>(k1 + kmax);
}

std::vector<std::pair<int, int>> FrequencyLattice::half() const {
  std::vector<std::pair<int, int>> out;
  for (int k2 = 0; k2 <= kmax; ++k2)
    for (int k1 = -kmax; k1 <= kmax; ++k1)
      if (k2 > 0 || k1 > 0) out.emplace_back(k1, k2);
  return out;
}

// a_hat

namespace {

NodalField plane_wave(const MeshPtr& mesh, const Vec2& z) {
  return interpolate(mesh, [&](const Point& x) { return z.dot(x); });
}

struct ProbeTraces {
  double m1 = 1.0, m2 = 1.0;
  BoundaryData u1, w1, u2, w2;
};

ProbeTraces probe_traces(const MeshPtr& mesh, const FrequencySample& s) {
  ProbeTraces t;
  t.m1 = probe_scale(*mesh, s.zeta_plus);
  t.m2 = probe_scale(*mesh, s.zeta_minus);
  const auto v1 = complex_boundary_values(
      mesh, [&](const Point& x) { return cgo_value(s.zeta_plus, x) / t.m1; });
  const auto v2 = complex_boundary_values(
      mesh, [&](const Point& x) { return cgo_value(s.zeta_minus, x) / t.m2; });
  t.u1 = v1.real();
  t.w1 = v1.imag();
  t.u2 = v2.real();
  t.w2 = v2.imag();
  return t;
}

struct PipelineJ {
  Complex value;
  double bar = 0.0;
  bool flagged = false;
  bool consistent = true;
};

PipelineJ pipeline_J(const ProblemSpec& spec, const FrequencySample& s,
                     const PipelineSettings& settings) {
  const NodalField v0 = plane_wave(spec.mesh(), s.z);
  const ProbeTraces t = probe_traces(spec.mesh(), s);
  const std::vector<BoundaryData> phi2{t.u2, t.w2};
  const auto du = J_fd_checked(spec, v0, t.u1, phi2, settings.tau, settings.schedule);
  const auto dw = J_fd_checked(spec, v0, t.w1, phi2, settings.tau, settings.schedule);
  const double scale = t.m1 * t.m2;
  PipelineJ out;
  out.value = scale * Complex(du[0].value - dw[1].value, du[1].value + dw[0].value);
  out.bar = scale * std::hypot(du[0].error_bar + dw[1].error_bar, du[1].error_bar + dw[0].error_bar);
  for (const auto* d : {&du[0], &du[1], &dw[0], &dw[1]}) {
    out.flagged = out.flagged || d->flagged;
    out.consistent = out.consistent && d->consistent;
  }
  return out;
}

}  // namespace

FrequencySample a_hat_oracle(const ProblemSpec& spec, FrequencySample s, const NodalField& r_v0) {
  const NodalField v0 = plane_wave(spec.mesh(), s.z);
  const auto g1 = [&](const Point& x) { return cgo_gradient(s.zeta_plus, x); };
  const auto g2 = [&](const Point& x) { return cgo_gradient(s.zeta_minus, x); };
  const Complex j7 = J_direct(spec, v0, r_v0, g1, g2, TriangleRule::seven_point());
  const Complex j3 = J_direct(spec, v0, r_v0, g1, g2, TriangleRule::three_point());
  const double factor = fourier_factor(spec.exponents, s.xi);
  s.mode = SampleMode::oracle;
  s.J_value = j7;
  s.a_hat = factor * j7;
  s.error_bar = std::abs(factor) * std::abs(j7 - j3);
  s.flagged = false;
  return s;
}

FrequencySample a_hat(const ProblemSpec& spec, FrequencySample s, SampleMode mode,
                      const PipelineSettings& settings) {
  spec.validate();
  if (!(s.xi.norm() > 0.0)) throw InvalidArgument("frequency must be nonzero");
  if (mode == SampleMode::oracle) {
    const NodalField r = solve_R(spec, plane_wave(spec.mesh(), s.z));
    return a_hat_oracle(spec, s, r);
  }

  settings.schedule.validate();
  if (!(settings.tau > 0.0)) throw InvalidArgument("tau must be positive");
  const double factor = fourier_factor(spec.exponents, s.xi);
  s.mode = SampleMode::pipeline;
  try {
    const PipelineJ fine = pipeline_J(spec, s, settings);
    s.J_value = fine.value;
    s.error_bar = fine.bar;
    s.flagged = fine.flagged || !fine.consistent;
    s.consistent = fine.consistent;
    if (settings.coarse) {
      const PipelineJ coarse = pipeline_J(*settings.coarse, s, settings);
      s.error_bar += std::abs(fine.value - coarse.value) / 3.0;
    }
  } catch (const DomainError&) {
    s.flagged = true;
  } catch (const SolverError&) {
    s.flagged = true;
  }
  if (s.flagged && !std::isfinite(std::abs(s.J_value))) s.J_value = 0.0;
  s.a_hat = factor * s.J_value;
  s.error_bar *= std::abs(factor);
  if (!std::isfinite(s.error_bar) || (s.flagged && s.error_bar == 0.0))
    s.error_bar = std::numeric_limits<double>::infinity();
  return s;
}

Complex quadrature_transform(const NodalField& a, const Vec2& xi) {
  using Gauss = boost::math::quadrature::gauss<double, 8>;
  // Full abscissae on [0, 1] from the symmetric half stored by the rule.
  std::vector<double> t, w;
  for (std::size_t i = 0; i < Gauss::abscissa().size(); ++i) {
    const double x = Gauss::abscissa()[i], wt = Gauss::weights()[i];
    t.push_back(0.5 * (1.0 + x));
    w.push_back(0.5 * wt);
    if (x != 0.0) {
      t.push_back(0.5 * (1.0 - x));
      w.push_back(0.5 * wt);
    }
  }
  // Collapsed square -> triangle: l1 = u, l2 = v (1 - u), Jacobian 2 (1 - u)
  // relative to the unit-area normalization.
  TriangleRule rule;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) {
      const double l1 = t[i], l2 = t[j] * (1.0 - t[i]);
      rule.bary.push_back({1.0 - l1 - l2, l1, l2});
      rule.weights.push_back(2.0 * w[i] * w[j] * (1.0 - t[i]));
    }
  const Mesh& mesh = *a.mesh();
  const Complex I(0.0, 1.0);
  Complex sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    Complex local = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k)
      local += rule.weights[k] * a.at(e, rule.bary[k]) *
               std::exp(I * xi.dot(mesh.map(e, rule.bary[k])));
    sum += mesh.area(e) * local;
  }
  return sum;
}

Complex dc_estimate(const FrequencyLattice& lattice, const std::vector<Complex>& values) {
  if (values.size() != lattice.size()) throw InvalidArgument("value count does not match lattice");
  // Shifting to the box centre removes the linear phase, so the real part is
  // even and smooth along each axis.
  const Point c((lattice.box.x_min + lattice.box.x_max) / 2, (lattice.box.y_min + lattice.box.y_max) / 2);
  const auto centred = [&](int k1, int k2) {
    return (values[lattice.index(k1, k2)] * std::polar(1.0, -lattice.frequency(k1, k2).dot(c))).real();
  };
  const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  double sum = 0.0;
  for (const auto& d : dirs)
    sum += (4.0 * centred(d[0], d[1]) - centred(2 * d[0], 2 * d[1])) / 3.0;
  return sum / 4.0;
}

// Inversion

ReconstructionResult invert(const std::vector<std::optional<FrequencySample>>& samples,
                            const FrequencyLattice& lattice, const MeshPtr& grid) {
  lattice.validate();
  if (samples.size() != lattice.size())
    throw InvalidArgument("sample count does not match the lattice");
  std::ostringstream missing;
  int n_missing = 0;
  for (int k2 = -lattice.kmax; k2 <= lattice.kmax; ++k2)
    for (int k1 = -lattice.kmax; k1 <= lattice.kmax; ++k1)
      if (!samples[lattice.index(k1, k2)]) {
        missing << (n_missing++ ? ", " : "") << "(" << k1 << "," << k2 << ")";
      }
  if (n_missing) throw InvalidArgument("missing frequencies: " + missing.str());

  ReconstructionResult out;
  out.lattice = lattice;
  for (const auto& s : samples) out.samples.push_back(*s);

  std::vector<Complex> sym(lattice.size());
  for (int k2 = -lattice.kmax; k2 <= lattice.kmax; ++k2)
    for (int k1 = -lattice.kmax; k1 <= lattice.kmax; ++k1)
      sym[lattice.index(k1, k2)] = 0.5 * (samples[lattice.index(k1, k2)]->a_hat +
                                          std::conj(samples[lattice.index(-k1, -k2)]->a_hat));

  // The exponential factorizes over the two axes.
  const double w = lattice.spacing();
  const double inv_area = 1.0 / lattice.box.area();
  const int side = lattice.side();
  out.a_rec = NodalField(grid, 0.0);
  const auto& nodes = grid->nodes();
  std::vector<Complex> ex(side), ey(side);
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const Point& x = nodes[n];
    if (!lattice.box.contains(x, 1e-12)) continue;
    for (int k = -lattice.kmax; k <= lattice.kmax; ++k) {
      ex[k + lattice.kmax] = std::polar(1.0, -w * k * x.x());
      ey[k + lattice.kmax] = std::polar(1.0, -w * k * x.y());
    }
    Complex v = 0.0;
    for (int j = 0; j < side; ++j) {
      Complex row = 0.0;
      for (int i = 0; i < side; ++i) row += sym[static_cast<std::size_t>(j) * side + i] * ex[i];
      v += row * ey[j];
    }
    v *= inv_area;
    out.a_rec[n] = v.real();
    out.imaginary_residue = std::max(out.imaginary_residue, std::abs(v.imag()));
  }
  return out;
}

ReconstructionResult reconstruct(const ProblemSpec& spec, const FrequencyLattice& lattice,
                                 SampleMode mode, const PipelineSettings& settings, int workers) {
  spec.validate();
  lattice.validate();
  const auto half = lattice.half();
  std::vector<FrequencySample> computed(half.size());
  parallel_for(
      half.size(),
      [&](std::size_t i) {
        const auto [k1, k2] = half[i];
        computed[i] = a_hat(spec, cgo_data(spec.p(), lattice.frequency(k1, k2)), mode, settings);
      },
      workers);

  std::vector<std::optional<FrequencySample>> samples(lattice.size());
  for (std::size_t i = 0; i < half.size(); ++i) {
    const auto [k1, k2] = half[i];
    const FrequencySample& s = computed[i];
    samples[lattice.index(k1, k2)] = s;
    FrequencySample m = cgo_data(spec.p(), -s.xi);
    m.J_value = std::conj(s.J_value);
    m.a_hat = std::conj(s.a_hat);
    m.error_bar = s.error_bar;
    m.mode = s.mode;
    m.flagged = s.flagged;
    m.consistent = s.consistent;
    samples[lattice.index(-k1, -k2)] = m;
  }

  std::vector<Complex> values(lattice.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (samples[i]) values[i] = samples[i]->a_hat;
  FrequencySample dc;
  dc.mode = mode;
  dc.a_hat = dc_estimate(lattice, values);
  const double b1 = samples[lattice.index(1, 0)]->error_bar + samples[lattice.index(0, 1)]->error_bar;
  const double b2 = samples[lattice.index(2, 0)]->error_bar + samples[lattice.index(0, 2)]->error_bar;
  dc.error_bar = (4.0 * b1 + b2) / 6.0;
  for (int k : {1, 2})
    dc.flagged = dc.flagged || samples[lattice.index(k, 0)]->flagged ||
                 samples[lattice.index(0, k)]->flagged;
  samples[lattice.index(0, 0)] = dc;
  return invert(samples, lattice, spec.mesh());
}

// Metrics

ReconstructionMetrics metrics(const ReconstructionResult& result, const NodalField& a_true) {
  if (result.a_rec.mesh() != a_true.mesh()) throw InvalidArgument("metrics need a common mesh");
  ReconstructionMetrics m;
  const NodalField diff = result.a_rec - a_true;
  const double ref = l2_norm(a_true);
  m.relative_l2 = ref > 0.0 ? l2_norm(diff) / ref : l2_norm(diff);
  m.max_node_error = max_abs(diff);
  return m;
}

std::vector<FrequencyDiscrepancy> compare(const ReconstructionResult& pipeline,
                                          const ReconstructionResult& oracle) {
  if (pipeline.samples.size() != oracle.samples.size())
    throw InvalidArgument("runs are on different lattices");
  std::vector<FrequencyDiscrepancy> out;
  const std::size_t dc = pipeline.lattice.index(0, 0);
  for (std::size_t i = 0; i < pipeline.samples.size(); ++i) {
    if (i == dc) continue;
    const auto& p = pipeline.samples[i];
    const auto& o = oracle.samples[i];
    FrequencyDiscrepancy d;
    d.xi = p.xi;
    d.pipeline = p.a_hat;
    d.oracle = o.a_hat;
    d.difference = std::abs(p.a_hat - o.a_hat);
    d.error_bar = p.error_bar;
    d.within_bar = d.difference <= d.error_bar;
    out.push_back(d);
  }
  return out;
}

// Ground truth

double GaussianBump::operator()(const Point& x) const {
  const double v = amplitude * std::exp(-width * (x - center).squaredNorm());
  return v < 1e-12 ? 0.0 : v;
}

Complex GaussianBump::transform(const Vec2& xi) const {
  const double mag = amplitude * std::numbers::pi / width * std::exp(-xi.squaredNorm() / (4.0 * width));
  return std::polar(mag, xi.dot(center));
}

}  // namespace dpinv
