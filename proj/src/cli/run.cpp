#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "dpinv/asymptotics.hpp"
#include "dpinv/cli.hpp"
#include "dpinv/dn_map.hpp"
#include "dpinv/forward.hpp"
#include "dpinv/linear_elliptic.hpp"
#include "dpinv/parallel.hpp"
#include "dpinv/reconstruct.hpp"

#ifndef DPINV_VERSION
#define DPINV_VERSION "unknown"
#endif

namespace dpinv::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Collects the files of one run so the manifest can list and hash them.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  const fs::path& dir() const { return dir_; }

  /// Rows of already formatted cells.
  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(dir_ / name, std::ios::binary);
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    files_.push_back(name);
  }

  void write_json(const std::string& name, const json& j) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << j.dump(2) << '\n';
    files_.push_back(name);
  }

  json listing() const {
    json list = json::array();
    for (const auto& f : files_)
      list.push_back({{"file", f}, {"sha256", sha256_file(dir_ / f)}, {"bytes", fs::file_size(dir_ / f)}});
    return list;
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

// Instance construction

NodalField read_coefficient(const MeshPtr& mesh, const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open coefficient file " + file);
  std::string line;
  std::getline(in, line);
  std::vector<double> values;
  const auto& nodes = mesh->nodes();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x, y, v;
    if (!(row >> x >> y >> v)) throw ConfigError("malformed row in " + file + ": " + line);
    const std::size_t k = values.size();
    if (k >= nodes.size() || std::abs(nodes[k].x() - x) > 1e-9 || std::abs(nodes[k].y() - y) > 1e-9)
      throw ConfigError("coefficient file " + file + " does not match the mesh nodes");
    values.push_back(v);
  }
  if (values.size() != nodes.size()) throw ConfigError("coefficient file " + file + " has too few rows");
  return NodalField(mesh, std::move(values));
}

NodalField coefficient(const RunConfig& c, const MeshPtr& mesh) {
  const auto& k = c.coefficient;
  if (k.kind == "zero") return NodalField(mesh, 0.0);
  if (k.kind == "constant") return NodalField(mesh, k.value);
  if (k.kind == "gaussian") {
    const GaussianBump bump{k.center, k.width, k.amplitude};
    return interpolate(mesh, [&](const Point& x) { return bump(x); });
  }
  return read_coefficient(mesh, k.file);
}

ProblemSpec make_spec(const RunConfig& c, int n) {
  ProblemSpec spec;
  spec.exponents = {c.p, c.q};
  spec.a = coefficient(c, build_mesh(n, n, c.domain));
  spec.delta = c.delta;
  spec.newton_tol = c.newton_tol;
  spec.max_iters = c.max_iters;
  spec.continuation_steps = c.continuation_steps;
  return spec;
}

std::function<double(const Point&)> data_function(const DataSpec& d) {
  if (d.kind == "product") return [](const Point& x) { return x.x() * x.y(); };
  if (d.kind == "saddle") return [](const Point& x) { return x.x() * x.x() - x.y() * x.y(); };
  const Vec2 z = d.z;
  return [z](const Point& x) { return z.dot(x); };
}

BoundaryData data(const DataSpec& d, const MeshPtr& mesh) {
  return boundary_values(mesh, data_function(d));
}

LimitSchedule schedule(const RunConfig& c) {
  LimitSchedule s = LimitSchedule::for_exponents({c.p, c.q}, c.schedule_points);
  s.extrapolation_order = c.extrapolation_order;
  return s;
}

std::vector<std::vector<std::string>> field_rows(const NodalField& u) {
  std::vector<std::vector<std::string>> rows;
  const auto& nodes = u.mesh()->nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i)
    rows.push_back({num(nodes[i].x()), num(nodes[i].y()), num(u[i])});
  return rows;
}

json estimate_json(const LimitEstimate& e) {
  return {{"value", e.value}, {"error_bar", e.error_bar}, {"fitted_order", e.fitted_order},
          {"flagged", e.flagged}, {"sequence", e.sequence}};
}

// Commands

void cmd_forward(const RunConfig& c, Artifacts& out) {
  const ProblemSpec spec = make_spec(c, c.n);
  const BoundaryData f = data(c.f, spec.mesh());
  const Solution sol = solve_dirichlet(spec, f);
  out.csv("solution.csv", {"x", "y", "u"}, field_rows(sol.u));
  out.write_json("metrics.json", {{"energy", sol.energy},
                                  {"residual", sol.residual},
                                  {"iterations", sol.iterations},
                                  {"converged", sol.converged},
                                  {"max_abs_u", max_abs(sol.u)},
                                  {"max_abs_f", f.max_abs()}});
}

void cmd_dn(const RunConfig& c, Artifacts& out) {
  const ProblemSpec spec = make_spec(c, c.n);
  const BoundaryData f = data(c.f, spec.mesh());
  const BoundaryData g = data(c.g, spec.mesh());
  const double value = pairing(DNQuery{spec, f, g, std::nullopt});
  PLaplaceCache cache;
  const double reference = pairing_plap(spec, f, g, 1.0, cache);
  out.write_json("metrics.json", {{"pairing", value}, {"pairing_a_zero", reference}});
}

void cmd_expand(const RunConfig& c, Artifacts& out) {
  const ProblemSpec spec = make_spec(c, c.n);
  const Vec2 z = c.f.z;
  const NodalField v = interpolate(spec.mesh(), [&](const Point& x) { return z.dot(x); });
  const ExpansionReport rep = expansion_error(spec, v, schedule(c));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < rep.errors.size(); ++k) rows.push_back({num(rep.schedule[k]), num(rep.errors[k])});
  out.csv("expansion.csv", {"s", "error"}, rows);
  out.write_json("metrics.json", {{"regime", c.p < c.q ? "epsilon" : "mu"},
                                  {"fitted_order", rep.fitted_order},
                                  {"decreasing", rep.passed}});
}

void cmd_verify(const RunConfig& c, Artifacts& out) {
  const ProblemSpec spec = make_spec(c, c.n);
  const MeshPtr& mesh = spec.mesh();
  const BoundaryData f = data(c.f, mesh);

  // f2 sits below f by a seeded random offset.
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BoundaryData f2 = f;
  const double scale = std::max(f.max_abs(), 1e-3);
  for (double& v : f2.values) v -= 0.1 * scale * unit(rng);
  const PrinciplesReport pr = verify_principles(spec, f, f2);

  const Vec2 z = c.f.z;
  const NodalField v = interpolate(mesh, [&](const Point& x) { return z.dot(x); });
  const BoundaryData g = data(c.g, mesh);
  const BoundaryData h = data(c.h, mesh);
  const LimitSchedule sched = schedule(c);
  const LimitEstimate il = I_limit(spec, v, g, sched);
  const double id = I_direct(spec, v, g);
  const auto jf = J_fd_checked(spec, v, g, std::span<const BoundaryData>(&h, 1), c.tau, sched).front();
  const double jd = J_direct(spec, v, solve_V(c.p, v, g), solve_V(c.p, v, h));
  const auto rel = [](double a, double b) { return b != 0.0 ? std::abs(a - b) / std::abs(b) : std::abs(a); };

  out.write_json(
      "metrics.json",
      {{"max_principle_slack", pr.max_principle_slack},
       {"comparison_slack", pr.comparison_slack},
       {"local_min_slack", pr.local_min_slack},
       {"bumps_tested", pr.bumps_tested},
       {"I_limit", estimate_json(il)},
       {"I_direct", id},
       {"I_relative_error", rel(il.value, id)},
       {"J_fd", {{"value", jf.value}, {"error_bar", jf.error_bar}, {"at_tau", jf.at_tau},
                 {"at_half_tau", jf.at_half_tau}, {"consistent", jf.consistent}, {"flagged", jf.flagged}}},
       {"J_direct", jd},
       {"J_relative_error", rel(jf.value, jd)}});
}

std::vector<std::vector<std::string>> lattice_rows(const ReconstructionResult& r) {
  std::vector<std::vector<std::string>> rows;
  const auto& lat = r.lattice;
  for (int k2 = -lat.kmax; k2 <= lat.kmax; ++k2)
    for (int k1 = -lat.kmax; k1 <= lat.kmax; ++k1) {
      const FrequencySample& s = r.samples[lat.index(k1, k2)];
      const Vec2 xi = lat.frequency(k1, k2);
      rows.push_back({std::to_string(k1), std::to_string(k2), num(xi.x()), num(xi.y()), num(s.a_hat.real()),
                      num(s.a_hat.imag()), num(s.error_bar), to_string(s.mode), s.flagged ? "1" : "0"});
    }
  return rows;
}

const std::vector<std::string> kLatticeHeader{"k1", "k2", "xi1", "xi2", "re", "im", "error_bar", "mode", "flagged"};

/// Inversion of the quadrature transform of a itself: the truncation floor.
double truncated_series_error(const ProblemSpec& spec, const FrequencyLattice& lat) {
  std::vector<std::optional<FrequencySample>> samples(lat.size());
  const auto half = lat.half();
  std::vector<Complex> values(half.size());
  parallel_for(half.size(), [&](std::size_t i) {
    values[i] = quadrature_transform(spec.a, lat.frequency(half[i].first, half[i].second));
  });
  for (std::size_t i = 0; i < half.size(); ++i) {
    const auto [k1, k2] = half[i];
    FrequencySample s;
    s.xi = lat.frequency(k1, k2);
    s.a_hat = values[i];
    samples[lat.index(k1, k2)] = s;
    s.xi = -s.xi;
    s.a_hat = std::conj(values[i]);
    samples[lat.index(-k1, -k2)] = s;
  }
  FrequencySample dc;
  dc.a_hat = quadrature_transform(spec.a, Vec2::Zero());
  samples[lat.index(0, 0)] = dc;
  return metrics(invert(samples, lat, spec.mesh()), spec.a).relative_l2;
}

void cmd_recon(const RunConfig& c, Artifacts& out, bool pipeline) {
  const ProblemSpec spec = make_spec(c, c.n);
  FrequencyLattice lat;
  lat.box = {c.box_min, c.box_max, c.box_min, c.box_max};
  lat.kmax = c.kmax;

  const ReconstructionResult oracle = reconstruct(spec, lat, SampleMode::oracle);
  const ReconstructionMetrics om = metrics(oracle, spec.a);
  json m = {{"lattice_side", lat.side()},
            {"truncated_series_relative_l2", truncated_series_error(spec, lat)},
            {"oracle_relative_l2", om.relative_l2},
            {"oracle_max_node_error", om.max_node_error}};

  if (!pipeline) {
    out.csv("ahat.csv", kLatticeHeader, lattice_rows(oracle));
    out.csv("a_rec.csv", {"x", "y", "value"}, field_rows(oracle.a_rec));
    m["relative_l2"] = om.relative_l2;
    m["max_node_error"] = om.max_node_error;
    m["imaginary_residue"] = oracle.imaginary_residue;
    out.write_json("metrics.json", m);
    return;
  }

  PipelineSettings ps;
  ps.schedule = schedule(c);
  ps.tau = c.tau;
  const int coarse = c.coarse == -1 ? (c.n >= 4 ? c.n / 2 : 0) : c.coarse;
  if (coarse > 0 && c.coefficient.kind != "file") ps.coarse = make_spec(c, coarse);
  const ReconstructionResult result = reconstruct(spec, lat, SampleMode::pipeline, ps);
  const ReconstructionMetrics pm = metrics(result, spec.a);
  const auto table = compare(result, oracle);

  std::vector<std::vector<std::string>> rows;
  int within = 0, flagged = 0;
  double worst = 0.0;
  for (const auto& d : table) {
    rows.push_back({num(d.xi.x()), num(d.xi.y()), num(d.pipeline.real()), num(d.pipeline.imag()),
                    num(d.oracle.real()), num(d.oracle.imag()), num(d.difference), num(d.error_bar),
                    d.within_bar ? "1" : "0"});
    within += d.within_bar;
    worst = std::max(worst, d.difference);
  }
  for (const auto& s : result.samples) flagged += s.flagged;
  out.csv("ahat.csv", kLatticeHeader, lattice_rows(result));
  out.csv("discrepancy.csv",
          {"xi1", "xi2", "pipeline_re", "pipeline_im", "oracle_re", "oracle_im", "difference", "error_bar",
           "within_bar"},
          rows);
  out.csv("a_rec.csv", {"x", "y", "value"}, field_rows(result.a_rec));
  m["relative_l2"] = pm.relative_l2;
  m["max_node_error"] = pm.max_node_error;
  m["a_rec_max_abs"] = max_abs(result.a_rec);
  m["imaginary_residue"] = result.imaginary_residue;
  m["within_bar"] = within;
  m["compared"] = table.size();
  m["flagged"] = flagged;
  m["max_discrepancy"] = worst;
  m["two_mesh_error_bar"] = ps.coarse.has_value();
  out.write_json("metrics.json", m);
}

json error_payload(const std::exception& e) {
  json j = {{"message", e.what()}};
  if (const auto* d = dynamic_cast<const DegenerateGradient*>(&e)) {
    j["type"] = "DegenerateGradient";
    j["element"] = d->element();
  } else if (const auto* d = dynamic_cast<const EllipticityError*>(&e)) {
    j["type"] = "EllipticityError";
    j["element"] = d->element();
  } else if (const auto* s = dynamic_cast<const SolverError*>(&e)) {
    j["type"] = dynamic_cast<const ConvergenceError*>(&e) ? "ConvergenceError" : "SolverError";
    j["iterations"] = s->iterations();
    j["residual"] = s->residual();
  } else if (dynamic_cast<const DomainError*>(&e)) {
    j["type"] = "DomainError";
  } else if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const ConfigError*>(&e)) {
    j["type"] = "ConfigError";
  } else {
    j["type"] = "Error";
  }
  return j;
}

}  // namespace

int run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = config.output_dir.empty() ? fs::path("dpinv_out") : fs::path(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "dpinv: cannot create output directory " << dir << ": " << ec.message() << "\n";
    return 2;
  }
  Artifacts out(dir);

  int status = 0;
  json error;
  try {
    config.validate();
    set_default_workers(config.workers);
    if (config.command == "forward") cmd_forward(config, out);
    else if (config.command == "dn") cmd_dn(config, out);
    else if (config.command == "expand") cmd_expand(config, out);
    else if (config.command == "verify") cmd_verify(config, out);
    else if (config.command == "recon") cmd_recon(config, out, true);
    else cmd_recon(config, out, false);
  } catch (const ConfigError& e) {
    status = 2;
    error = error_payload(e);
  } catch (const InvalidArgument& e) {
    status = 2;
    error = error_payload(e);
  } catch (const std::exception& e) {
    status = 1;
    error = error_payload(e);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json cfg = json::object();
  for (const auto& [k, v] : config.entries()) cfg[k] = v;
  json manifest = {{"tool", "dpinv"},
                   {"version", DPINV_VERSION},
                   {"command", config.command},
                   {"status", status == 0 ? "ok" : status == 1 ? "solver_failure" : "config_error"},
                   {"exit_code", status},
                   {"config", cfg},
                   {"timings", {{"total_seconds", seconds}}},
                   {"outputs", out.listing()}};
  if (status != 0) {
    manifest["error"] = error;
    std::cerr << "dpinv: " << error["message"].get<std::string>() << "\n";
  }
  std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
  return status;
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig config;
  try {
    config = parse_arguments(args);
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "dpinv: " << e.what() << "\n";
    return 2;
  }
  return run(config);
}

}  // namespace dpinv::cli
