#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "dpinv/cli.hpp"

namespace dpinv::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void check_data(const DataSpec& d, const std::string& name) {
  require(d.kind == "plane-wave" || d.kind == "product" || d.kind == "saddle",
          name + ".kind must be plane-wave, product or saddle");
  if (d.kind == "plane-wave") require(d.z.norm() > 0.0, name + " plane wave needs a nonzero z");
}

}  // namespace

void RunConfig::validate() const {
  static const std::vector<std::string> commands{"forward", "dn",    "expand",
                                                 "verify",  "recon", "oracle-recon"};
  require(std::find(commands.begin(), commands.end(), command) != commands.end(),
          "run.command must be one of forward, dn, expand, verify, recon, oracle-recon");
  require(n >= 2 && n <= 1024, "mesh.n must lie in [2, 1024]");
  require(coarse == -1 || coarse == 0 || (coarse >= 2 && coarse < n),
          "mesh.coarse must be -1, 0 or in [2, mesh.n)");
  require(domain.x_min < domain.x_max && domain.y_min < domain.y_max, "mesh domain is empty");
  require(p > 1.0 && q > 1.0 && std::isfinite(p) && std::isfinite(q), "problem.p and problem.q must exceed 1");
  require(p != q, "problem.p and problem.q must differ");
  require(delta > 0.0, "problem.delta must be positive");
  require(newton_tol > 0.0 && newton_tol < 1.0, "problem.newton_tol must lie in (0, 1)");
  require(max_iters >= 1, "problem.max_iters must be positive");
  require(continuation_steps >= 1, "problem.continuation_steps must be positive");

  const auto& c = coefficient;
  require(c.kind == "zero" || c.kind == "constant" || c.kind == "gaussian" || c.kind == "file",
          "coefficient.kind must be zero, constant, gaussian or file");
  if (c.kind == "constant") require(c.value >= 0.0, "coefficient.value must be nonnegative");
  if (c.kind == "gaussian") {
    require(c.amplitude >= 0.0, "coefficient.amplitude must be nonnegative");
    require(c.width > 0.0, "coefficient.width must be positive");
  }
  if (c.kind == "file") require(!c.file.empty(), "coefficient.file is required for kind = file");
  check_data(f, "data.f");
  check_data(g, "data.g");
  check_data(h, "data.h");

  require(schedule_points >= 3 && schedule_points <= 12, "limits.schedule_points must lie in [3, 12]");
  require(extrapolation_order >= 0, "limits.extrapolation_order must be nonnegative");
  require(tau > 0.0 && tau < 1.0, "limits.tau must lie in (0, 1)");
  require(kmax >= 2 && kmax <= 32, "recon.kmax must lie in [2, 32]");
  require(box_min < domain.x_min && box_min < domain.y_min && box_max > domain.x_max &&
              box_max > domain.y_max,
          "recon box must strictly contain the domain");
  require(workers >= 1, "run.workers must be positive");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  return {
      {"run.command", command},
      {"run.output", output_dir},
      {"run.workers", std::to_string(workers)},
      {"run.seed", std::to_string(seed)},
      {"mesh.n", std::to_string(n)},
      {"mesh.coarse", std::to_string(coarse)},
      {"mesh.x_min", num(domain.x_min)},
      {"mesh.x_max", num(domain.x_max)},
      {"mesh.y_min", num(domain.y_min)},
      {"mesh.y_max", num(domain.y_max)},
      {"problem.p", num(p)},
      {"problem.q", num(q)},
      {"problem.delta", num(delta)},
      {"problem.newton_tol", num(newton_tol)},
      {"problem.max_iters", std::to_string(max_iters)},
      {"problem.continuation_steps", std::to_string(continuation_steps)},
      {"coefficient.kind", coefficient.kind},
      {"coefficient.value", num(coefficient.value)},
      {"coefficient.center_x", num(coefficient.center.x())},
      {"coefficient.center_y", num(coefficient.center.y())},
      {"coefficient.width", num(coefficient.width)},
      {"coefficient.amplitude", num(coefficient.amplitude)},
      {"coefficient.file", coefficient.file},
      {"data.f", f.kind},
      {"data.f_z1", num(f.z.x())},
      {"data.f_z2", num(f.z.y())},
      {"data.g", g.kind},
      {"data.g_z1", num(g.z.x())},
      {"data.g_z2", num(g.z.y())},
      {"data.h", h.kind},
      {"data.h_z1", num(h.z.x())},
      {"data.h_z2", num(h.z.y())},
      {"limits.schedule_points", std::to_string(schedule_points)},
      {"limits.extrapolation_order", std::to_string(extrapolation_order)},
      {"limits.tau", num(tau)},
      {"recon.kmax", std::to_string(kmax)},
      {"recon.box_min", num(box_min)},
      {"recon.box_max", num(box_max)},
  };
}

RunConfig parse_arguments(const std::vector<std::string>& args) {
  // The config file is expanded into flags placed ahead of the real ones;
  // every option keeps its last value, so flags win.
  std::vector<std::string> expanded;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
    if (path.empty()) continue;
    try {
      for (const auto& item : CLI::ConfigINI().from_file(path)) {
        if (item.name == "++" || item.name == "--") continue;
        if (item.inputs.size() != 1)
          throw ConfigError("config key " + item.fullname() + " needs exactly one value");
        expanded.push_back("--" + item.fullname() + "=" + item.inputs.front());
      }
    } catch (const CLI::Error& e) {
      throw ConfigError("cannot read config file " + path + ": " + e.what());
    }
  }
  expanded.insert(expanded.end(), args.begin(), args.end());

  RunConfig c;
  if (const char* env = std::getenv(kOutputDirEnv)) c.output_dir = env;
  if (c.output_dir.empty()) c.output_dir = "dpinv_out";

  CLI::App app{"Double phase forward solver, DN map and coefficient reconstruction", "dpinv"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  app.add_option("--config", config_path, "Sectioned key = value file; flags override it");
  app.add_option("command", c.command, "forward | dn | expand | verify | recon | oracle-recon");
  app.add_option("--run.command", c.command);
  app.add_option("--run.output", c.output_dir, std::string("Output directory (default $") + kOutputDirEnv + ")");
  app.add_option("--run.workers", c.workers);
  app.add_option("--run.seed", c.seed);
  app.add_option("--mesh.n", c.n, "Cells per side");
  app.add_option("--mesh.coarse", c.coarse, "Coarse mesh for recon error bars (0 = off, -1 = n/2)");
  app.add_option("--mesh.x_min", c.domain.x_min);
  app.add_option("--mesh.x_max", c.domain.x_max);
  app.add_option("--mesh.y_min", c.domain.y_min);
  app.add_option("--mesh.y_max", c.domain.y_max);
  app.add_option("--problem.p", c.p);
  app.add_option("--problem.q", c.q);
  app.add_option("--problem.delta", c.delta);
  app.add_option("--problem.newton_tol", c.newton_tol);
  app.add_option("--problem.max_iters", c.max_iters);
  app.add_option("--problem.continuation_steps", c.continuation_steps);
  app.add_option("--coefficient.kind", c.coefficient.kind, "zero | constant | gaussian | file");
  app.add_option("--coefficient.value", c.coefficient.value);
  app.add_option("--coefficient.center_x", c.coefficient.center.x());
  app.add_option("--coefficient.center_y", c.coefficient.center.y());
  app.add_option("--coefficient.width", c.coefficient.width);
  app.add_option("--coefficient.amplitude", c.coefficient.amplitude);
  app.add_option("--coefficient.file", c.coefficient.file);
  app.add_option("--data.f", c.f.kind, "plane-wave | product | saddle");
  app.add_option("--data.f_z1", c.f.z.x());
  app.add_option("--data.f_z2", c.f.z.y());
  app.add_option("--data.g", c.g.kind, "plane-wave | product | saddle");
  app.add_option("--data.g_z1", c.g.z.x());
  app.add_option("--data.g_z2", c.g.z.y());
  app.add_option("--data.h", c.h.kind, "plane-wave | product | saddle");
  app.add_option("--data.h_z1", c.h.z.x());
  app.add_option("--data.h_z2", c.h.z.y());
  app.add_option("--limits.schedule_points", c.schedule_points);
  app.add_option("--limits.extrapolation_order", c.extrapolation_order);
  app.add_option("--limits.tau", c.tau);
  app.add_option("--recon.kmax", c.kmax);
  app.add_option("--recon.box_min", c.box_min);
  app.add_option("--recon.box_max", c.box_max);

  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

}  // namespace dpinv::cli
