#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dpinv/asymptotics.hpp"
#include "dpinv/mesh.hpp"
#include "dpinv/problem.hpp"

namespace dpinv {

enum class SampleMode { pipeline, oracle };

const char* to_string(SampleMode mode);

/// One frequency of the Fourier data of a, together with the probe geometry
/// used to obtain it.
struct FrequencySample {
  Vec2 xi = Vec2::Zero();
  /// Unit vector, counterclockwise rotation of xi / |xi|.
  Vec2 z = Vec2::Zero();
  /// zeta_{+-} = +-(|xi| / (2 sqrt(p-1))) z + i xi / 2.
  CVec2 zeta_plus = CVec2::Zero();
  CVec2 zeta_minus = CVec2::Zero();
  Complex J_value = 0.0;
  Complex a_hat = 0.0;
  /// Bound on |a_hat - exact| estimated from the computation.
  double error_bar = 0.0;
  SampleMode mode = SampleMode::oracle;
  bool flagged = false;
  /// Pipeline only: tau and tau/2 derivatives agreed.
  bool consistent = true;
};

/// Probe geometry for frequency xi (rejects xi = 0).
FrequencySample cgo_data(double p, const Vec2& xi);

/// e^{zeta . x} and its gradient.
Complex cgo_value(const CVec2& zeta, const Point& x);
CVec2 cgo_gradient(const CVec2& zeta, const Point& x);

/// max over boundary nodes of |e^{zeta . x}|.
double probe_scale(const Mesh& mesh, const CVec2& zeta);

/// -4 (p-1) / ((p+q-2) |xi|^2), the factor turning J into a_hat.
double fourier_factor(const ExponentPair& e, const Vec2& xi);

/// Frequencies (2 pi / L) k, |k_i| <= kmax, of a square periodization box of
/// side L containing the domain.
struct FrequencyLattice {
  Domain box{-0.5, 1.5, -0.5, 1.5};
  int kmax = 8;

  /// Throws InvalidArgument unless the box is square and kmax >= 2.
  void validate() const;
  double spacing() const;
  int side() const { return 2 * kmax + 1; }
  std::size_t size() const { return static_cast<std::size_t>(side()) * side(); }
  Vec2 frequency(int k1, int k2) const;
  /// Row-major position of (k1, k2), k2 slowest.
  std::size_t index(int k1, int k2) const;
  /// Nonzero frequencies with k2 > 0, or k2 = 0 and k1 > 0; the other half
  /// follows from a_hat(-xi) = conj(a_hat(xi)).
  std::vector<std::pair<int, int>> half() const;
};

struct PipelineSettings {
  LimitSchedule schedule;
  double tau = 1e-2;
  /// Same instance on a coarser mesh; when present the two-mesh difference
  /// |J_h - J_2h| / 3 is added to the error bar.
  std::optional<ProblemSpec> coarse;
};

/// Fills J_value, a_hat and error_bar of a skeleton from cgo_data.
/// Oracle mode evaluates J_direct with the analytic probes (seven-point rule,
/// error bar from the three-point rule). Pipeline mode differentiates the
/// limit I along the normalized real and imaginary probe parts (four real
/// J_fd evaluations). Failed extrapolations come back flagged.
FrequencySample a_hat(const ProblemSpec& spec, FrequencySample sample, SampleMode mode,
                      const PipelineSettings& settings = {});

/// Oracle-mode sample with a precomputed corrector for v0 = z . x, for
/// callers that loop over frequencies sharing a direction.
FrequencySample a_hat_oracle(const ProblemSpec& spec, FrequencySample sample,
                             const NodalField& r_v0);

/// int a e^{i xi . x} of the P1 coefficient, by an 8x8 collapsed Gauss rule
/// on each triangle.
Complex quadrature_transform(const NodalField& a, const Vec2& xi);

/// a_hat(0) from the two smallest lattice frequencies along the four axis
/// directions: (4 b(xi_1) - b(xi_2)) / 3, averaged, with
/// b(xi) = Re(a_hat(xi) e^{-i xi . c}) and c the centre of the box.
/// `values` is indexed by FrequencyLattice::index; the entry at 0 is ignored.
Complex dc_estimate(const FrequencyLattice& lattice, const std::vector<Complex>& values);

struct ReconstructionResult {
  FrequencyLattice lattice;
  /// Full lattice, FrequencyLattice::index order; the centre is the DC estimate.
  std::vector<FrequencySample> samples;
  NodalField a_rec;
  /// max over nodes of |Im| before the real part was taken.
  double imaginary_residue = 0.0;
};

/// a_rec(x) = (1/|box|) sum a_hat(xi) e^{-i xi . x} at the nodes of grid, after
/// Hermitian symmetrization. Nodes outside the box are set to zero.
/// Throws InvalidArgument listing missing frequencies when samples do not
/// cover the lattice (the DC entry included).
ReconstructionResult invert(const std::vector<std::optional<FrequencySample>>& samples,
                            const FrequencyLattice& lattice, const MeshPtr& grid);

/// Runs every frequency of the half lattice in the given mode, completes the
/// lattice by conjugation and the DC estimate, and inverts onto spec's mesh.
ReconstructionResult reconstruct(const ProblemSpec& spec, const FrequencyLattice& lattice,
                                 SampleMode mode, const PipelineSettings& settings = {},
                                 int workers = 0);

struct FrequencyDiscrepancy {
  Vec2 xi;
  Complex pipeline;
  Complex oracle;
  double difference = 0.0;
  double error_bar = 0.0;
  bool within_bar = false;
};

struct ReconstructionMetrics {
  double relative_l2 = 0.0;
  double max_node_error = 0.0;
};

/// Errors of a_rec against a_true on the same mesh.
ReconstructionMetrics metrics(const ReconstructionResult& result, const NodalField& a_true);

/// Pairs the samples of two runs on the same lattice (DC entry excluded).
std::vector<FrequencyDiscrepancy> compare(const ReconstructionResult& pipeline,
                                          const ReconstructionResult& oracle);

/// exp(-w |x - c|^2) scaled by amplitude, clipped to zero below 1e-12.
struct GaussianBump {
  Point center{0.5, 0.5};
  double width = 50.0;
  double amplitude = 1.0;

  double operator()(const Point& x) const;
  /// Closed-form transform over the plane (the clipped tail is below 1e-12).
  Complex transform(const Vec2& xi) const;
};

}  // namespace dpinv
