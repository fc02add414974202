#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpinv/mesh.hpp"

namespace dpinv::cli {

/// Bad or inconsistent configuration; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// --help was given; what() holds the usage text.
class HelpRequested : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Named coefficient preset.
struct CoefficientSpec {
  std::string kind = "zero";  // zero | constant | gaussian | file
  double value = 1.0;         // constant
  Point center{0.5, 0.5};     // gaussian
  double width = 50.0;
  double amplitude = 1.0;
  std::string file;  // CSV x,y,value in node order, as written by the CLI
};

/// Named boundary data preset.
struct DataSpec {
  std::string kind = "plane-wave";  // plane-wave | product | saddle
  Vec2 z{1.0, 0.0};                 // plane-wave: z . x
};

struct RunConfig {
  std::string command;  // forward | dn | expand | verify | recon | oracle-recon

  // [mesh]
  int n = 64;
  /// Coarse mesh for the two-mesh error bar in recon; 0 disables it and -1
  /// picks n / 2.
  int coarse = -1;
  Domain domain;

  // [problem]
  double p = 2.0;
  double q = 3.0;
  double delta = 1e-8;
  double newton_tol = 1e-10;
  int max_iters = 200;
  int continuation_steps = 4;

  // [coefficient]
  CoefficientSpec coefficient;

  // [data]
  DataSpec f;
  DataSpec g{"product", {1.0, 0.0}};
  /// Second probe of the derivative check in verify.
  DataSpec h{"saddle", {1.0, 0.0}};

  // [limits]
  int schedule_points = 4;
  int extrapolation_order = 3;
  double tau = 1e-2;

  // [recon]
  int kmax = 8;
  double box_min = -0.5;
  double box_max = 1.5;

  // [run]
  std::string output_dir;
  int workers = 1;
  std::uint64_t seed = 0;

  /// Throws ConfigError when a field is outside the range its module accepts.
  void validate() const;
  /// Flat key = value listing of every field, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "DPINV_OUTPUT_DIR";

/// Reads `--config FILE` (sectioned key = value text) and command-line flags
/// `--section.key value`; flags win over the file. Throws ConfigError on
/// unreadable files or unknown keys; range checks are left to run(), which
/// records them in the manifest.
RunConfig parse_arguments(const std::vector<std::string>& args);

/// Executes the configured command and writes its artifacts and manifest.
/// Returns 0 on success, 1 on solver failure, 2 on configuration error.
int run(const RunConfig& config);

/// parse_arguments + run, with usage errors reported on stderr.
int main_entry(int argc, char** argv);

/// Lowercase hex SHA-256 of a file.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace dpinv::cli
