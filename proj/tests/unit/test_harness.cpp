#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ciflow/harness/runner.hpp"
#include "doctest.h"

using namespace ciflow::harness;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = CIFLOW_SOURCE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ciflow_test_harness" / name;
  fs::remove_all(dir);
  return dir;
}

json load(const std::string& config, const std::vector<std::string>& overrides = {}) {
  json cfg = read_config_file(kSource / "configs" / config);
  for (const auto& o : overrides) apply_override(cfg, o);
  return resolve(cfg);
}

int run_quiet(const json& resolved, const fs::path& dir, int threads = 1) {
  std::ostringstream log;
  return execute(resolved, {.out_dir = dir, .threads = threads, .log = &log});
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CIFLOW_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> csv_files(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("embedded schema is the published file") {
  CHECK(std::string(schema_text()) == slurp(kSource / "schema" / "run_config.schema.json"));
  CHECK(schema()["type"] == "object");
}

TEST_CASE("every shipped config validates") {
  int count = 0;
  for (const auto& e : fs::directory_iterator(kSource / "configs")) {
    if (e.path().extension() != ".json") continue;
    ++count;
    CAPTURE(e.path().string());
    const json cfg = read_config_file(e.path());
    CHECK(validate_config(cfg).empty());
    CHECK_NOTHROW(RunConfig::from_json(resolve(cfg)));
  }
  CHECK(count >= 7);
}

TEST_CASE("validator rejects malformed configs") {
  const json base = {{"experiment", "representation"}};
  CHECK(validate_config(base).empty());
  CHECK_FALSE(validate_config(json::object()).empty());
  CHECK_FALSE(validate_config({{"experiment", "nope"}}).empty());
  CHECK_FALSE(validate_config({{"experiment", "representation"}, {"extra", 1}}).empty());
  CHECK_FALSE(validate_config({{"experiment", "representation"}, {"grid", {{"N", 12}}}}).empty());
  CHECK_FALSE(validate_config({{"experiment", "representation"}, {"grid", {{"N", "32"}}}}).empty());
  CHECK_FALSE(validate_config({{"experiment", "representation"}, {"physics", {{"nu", 0.0}}}}).empty());
  CHECK_FALSE(validate_config({{"experiment", "representation"}, {"mc", {{"M", 1.5}}}}).empty());
  CHECK_FALSE(validate_config({{"experiment", "representation"}, {"mollify", {{"levels", json::array()}}}}).empty());
  CHECK_FALSE(validate_config({{"experiment", "representation"}, {"thresholds", {{"x", "big"}}}}).empty());
  CHECK_THROWS_AS(resolve({{"experiment", 3}}), ConfigError);
  try {
    resolve({{"experiment", 3}});
  } catch (const ConfigError& e) {
    CHECK(e.code() == kSchemaViolation);
  }
}

TEST_CASE("defaults are filled from the schema") {
  const json r = resolve({{"experiment", "feynman_kac"}, {"grid", {{"N", 16}}}});
  CHECK(r["grid"]["N"] == 16);
  CHECK(r["grid"]["d"] == 2);
  CHECK(r["mc"]["M"] == 1024);
  CHECK(r["output"]["write_fields"] == true);
  const auto cfg = RunConfig::from_json(r);
  CHECK(cfg.counts() == std::vector<int>{1024});
  CHECK_THROWS_AS(cfg.threshold("missing"), ConfigError);
}

TEST_CASE("dotted overrides") {
  json cfg = {{"experiment", "representation"}};
  apply_override(cfg, "mc.M=64");
  apply_override(cfg, "mc.sample_counts=[16,64]");
  apply_override(cfg, "output.dir=/tmp/x y");
  apply_override(cfg, "physics.nu=0.5");
  CHECK(cfg["mc"]["M"] == 64);
  CHECK(cfg["mc"]["sample_counts"] == json::array({16, 64}));
  CHECK(cfg["output"]["dir"] == "/tmp/x y");
  CHECK(cfg["physics"]["nu"] == 0.5);
  CHECK_THROWS_AS(apply_override(cfg, "novalue"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "=3"), ConfigError);
}

TEST_CASE("smoke run writes a complete, schema-valid artifact set") {
  const auto dir = fresh_dir("smoke");
  const auto start = std::chrono::steady_clock::now();
  CHECK(run_quiet(load("smoke.json"), dir) == kOk);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 5.0);
  for (const char* f : {"resolved_config.json", "summary.csv", "report.json", "timing.json"})
    CHECK(fs::exists(dir / f));
  CHECK_FALSE(fs::is_empty(dir / "fields"));
  const json resolved = json::parse(slurp(dir / "resolved_config.json"));
  CHECK(validate_config(resolved).empty());
  CHECK(resolved == load("smoke.json"));
  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report["version"] == version());
  CHECK(report["seed"] == resolved["mc"]["seed"]);
  CHECK(report["status"] == "passed");
}

TEST_CASE("summary CSV column contract") {
  const auto dir = fresh_dir("columns");
  REQUIRE(run_quiet(load("smoke.json"), dir) == kOk);
  std::istringstream in(slurp(dir / "summary.csv"));
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "experiment,N,M,delta,t,n,err_l2_rel,err_hs_rel,mc_se,wall_seconds");
  REQUIRE(std::getline(in, row));
  CHECK(std::count(row.begin(), row.end(), ',') == 9);
  CHECK(row.rfind("representation,8,16,", 0) == 0);
}

TEST_CASE("reruns and thread counts give byte-identical outputs") {
  const auto cfg = load("smoke.json", {"grid.N=16", "mc.M=64"});
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b"), c = fresh_dir("det_c");
  REQUIRE(run_quiet(cfg, a, 1) == kOk);
  REQUIRE(run_quiet(cfg, b, 1) == kOk);
  REQUIRE(run_quiet(cfg, c, 3) == kOk);
  const auto files = csv_files(a);
  CHECK(files == csv_files(b));
  CHECK(files == csv_files(c));
  for (const auto& f : files) {
    if (f == "timing.json") continue;
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / f) == slurp(c / f));
  }
}

TEST_CASE("cli exit codes") {
  const auto out = fresh_dir("cli");
  CHECK(cli("version") == kOk);
  CHECK(cli("list-experiments") == kOk);
  CHECK(cli("") == kUsage);
  CHECK(cli("frobnicate") == kUsage);
  CHECK(cli("validate \"" + (kSource / "configs" / "smoke.json").string() + "\"") == kOk);

  CHECK(cli("run /nonexistent/config.json --out \"" + out.string() + "\"") == kUsage);
  CHECK_FALSE(fs::exists(out));

  fs::create_directories(out);
  const auto bad = out / "bad.json";
  std::ofstream(bad) << R"({"experiment": "representation", "grid": {"N": 12}})";
  CHECK(cli("run \"" + bad.string() + "\" --out \"" + (out / "bad_run").string() + "\"") == kSchemaViolation);
  CHECK_FALSE(fs::exists(out / "bad_run"));
  std::ofstream(out / "notjson.json") << "{";
  CHECK(cli("validate \"" + (out / "notjson.json").string() + "\"") == kSchemaViolation);

  const auto smoke = "\"" + (kSource / "configs" / "smoke.json").string() + "\"";
  std::ofstream(out / "file") << "x";
  CHECK(cli("run " + smoke + " --out \"" + (out / "file" / "sub").string() + "\"") == kOutputPathError);
  CHECK(cli("run " + smoke + " --threads -1") == kUsage);
  CHECK(cli("run " + smoke + " --override nonsense") == kUsage);
  CHECK(cli("run " + smoke + " --out \"" + (out / "ok").string() + "\" --seed 5 --threads 2") == kOk);
  CHECK(json::parse(slurp(out / "ok" / "report.json"))["seed"] == 5);
  CHECK(cli("run " + smoke + " --out \"" + (out / "strict").string() + "\" --override thresholds.err_floor=1e-9" +
            " --override thresholds.se_multiple=0") == kChecksFailed);
}

TEST_CASE("solver failure has its own exit code") {
  const auto dir = fresh_dir("solver_failure");
  const auto cfg = load("smoke.json", {"initial.kind=\"random\"", "initial.amplitude=500", "physics.dt=0.01",
                                       "initial.max_mode=3", "physics.T=0.02", "physics.nu=0.001", "solver.max_picard=2",
                                       "mc.delta=0.01"});
  CHECK(run_quiet(cfg, dir) == kSolverFailure);
  CHECK(json::parse(slurp(dir / "report.json"))["status"] == "solver_failure");
}

TEST_CASE("runtime scales with the sample count") {
  const auto time_run = [](int M) {
    const auto cfg = load("smoke.json", {"grid.N=16", "physics.T=0.05", "mc.M=" + std::to_string(M)});
    double best = 1e300;
    for (int r = 0; r < 3; ++r) {
      const auto start = std::chrono::steady_clock::now();
      REQUIRE(run_quiet(cfg, fresh_dir("timing")) == kOk);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return best;
  };
  const double t64 = time_run(64), t128 = time_run(128);
  MESSAGE("M=64: " << t64 << " s, M=128: " << t128 << " s");
  // Halving M halves the runtime, to within a factor of 2.
  CHECK(t128 / t64 >= 1.0);
  CHECK(t128 / t64 <= 4.0);
}
