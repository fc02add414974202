#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "dpinv/cli.hpp"

namespace fs = std::filesystem;
using namespace dpinv::cli;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dpinv_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("flags and config file") {
    const fs::path dir = scratch("cfg");
    fs::create_directories(dir);
    std::ofstream(dir / "run.ini") << "[mesh]\nn = 12\n\n[problem]\np = 1.5\nq = 2.5\n\n[coefficient]\nkind = constant\nvalue = 0.3\n";
    const RunConfig c = parse_arguments({"forward", "--config", (dir / "run.ini").string(), "--problem.q", "3.5"});
    CHECK(c.command == "forward");
    CHECK(c.n == 12);
    CHECK(c.p == 1.5);
    CHECK(c.q == 3.5);
    CHECK(c.coefficient.kind == "constant");
    CHECK(c.coefficient.value == 0.3);
    CHECK_NOTHROW(c.validate());
    CHECK_THROWS_AS(parse_arguments({"forward", "--mesh.bogus", "3"}), ConfigError);
    CHECK_THROWS_AS(parse_arguments({"forward", "--config", (dir / "absent.ini").string()}), ConfigError);
    CHECK_THROWS_AS(parse_arguments({"--help"}), HelpRequested);
  }

  TEST_CASE("validation") {
    RunConfig c;
    c.command = "forward";
    CHECK_NOTHROW(c.validate());
    for (auto mutate : std::vector<std::function<void(RunConfig&)>>{
             [](RunConfig& r) { r.command = "fly"; }, [](RunConfig& r) { r.p = 1.0; },
             [](RunConfig& r) { r.q = r.p; }, [](RunConfig& r) { r.n = 0; },
             [](RunConfig& r) { r.kmax = 1; }, [](RunConfig& r) { r.coefficient.kind = "wavy"; },
             [](RunConfig& r) { r.workers = 0; }}) {
      RunConfig bad = c;
      mutate(bad);
      CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
  }

  TEST_CASE("forward with a plane wave") {
    RunConfig c;
    c.command = "forward";
    c.n = 8;
    c.output_dir = scratch("forward").string();
    REQUIRE(run(c) == 0);
    std::istringstream csv(slurp(fs::path(c.output_dir) / "solution.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "x,y,u");
    int rows = 0;
    while (std::getline(csv, line)) {
      double x, y, u;
      char comma;
      std::istringstream(line) >> x >> comma >> y >> comma >> u;
      CHECK(std::abs(u - x) <= 1e-10);
      ++rows;
    }
    CHECK(rows == 81);
    const auto manifest = read_json(fs::path(c.output_dir) / "manifest.json");
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["exit_code"] == 0);
    for (const auto& f : manifest["outputs"])
      CHECK(f["sha256"] == sha256_file(fs::path(c.output_dir) / f["file"].get<std::string>()));
  }

  TEST_CASE("configuration errors are recorded") {
    RunConfig c;
    c.command = "forward";
    c.p = 0.5;
    c.output_dir = scratch("bad").string();
    CHECK(run(c) == 2);
    const auto manifest = read_json(fs::path(c.output_dir) / "manifest.json");
    CHECK(manifest["status"] != "ok");
    CHECK(manifest.contains("error"));
    CHECK(manifest["exit_code"] == 2);
  }

  TEST_CASE("sha256 of a known string") {
    const fs::path dir = scratch("sha");
    fs::create_directories(dir);
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    CHECK(sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("oracle reconstruction is deterministic") {
    RunConfig c;
    c.command = "oracle-recon";
    c.n = 16;
    c.kmax = 2;
    c.coefficient.kind = "gaussian";
    c.workers = 3;
    c.output_dir = scratch("det1").string();
    REQUIRE(run(c) == 0);
    RunConfig d = c;
    d.workers = 2;
    d.output_dir = scratch("det2").string();
    REQUIRE(run(d) == 0);
    for (const char* f : {"ahat.csv", "a_rec.csv", "metrics.json"})
      CHECK(slurp(fs::path(c.output_dir) / f) == slurp(fs::path(d.output_dir) / f));
    const auto metrics = read_json(fs::path(c.output_dir) / "metrics.json");
    CHECK(metrics.contains("relative_l2"));
  }

  TEST_CASE("pipeline reconstruction of a zero coefficient") {
    RunConfig c;
    c.command = "recon";
    c.n = 12;
    c.coarse = 0;
    c.kmax = 2;
    c.output_dir = scratch("zero").string();
    REQUIRE(run(c) == 0);
    std::istringstream csv(slurp(fs::path(c.output_dir) / "a_rec.csv"));
    std::string line;
    std::getline(csv, line);
    double worst = 0.0;
    while (std::getline(csv, line)) {
      double x, y, v;
      char comma;
      std::istringstream(line) >> x >> comma >> y >> comma >> v;
      worst = std::max(worst, std::abs(v));
    }
    CHECK(worst <= 1e-3);
  }

  TEST_CASE("executable exit codes") {
    const char* tool = std::getenv("DPINV_TOOL");
    if (!tool) return;
    const std::string out = scratch("exe").string();
    CHECK(std::system((std::string(tool) + " forward --mesh.n 4 --run.output " + out + " > /dev/null 2>&1").c_str()) == 0);
    CHECK(WEXITSTATUS(std::system((std::string(tool) + " forward --problem.p 0.5 --run.output " + out + " > /dev/null 2>&1").c_str())) == 2);
  }
}
