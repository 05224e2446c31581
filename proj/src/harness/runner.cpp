#include "ciflow/harness/runner.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ciflow/field_io.hpp"

namespace ciflow::harness {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

json check_json(const Check& c) {
  return {{"name", c.name},           {"value", c.value}, {"relation", c.relation},
          {"threshold", c.threshold}, {"passed", c.passed}, {"note", c.note}};
}

fs::path output_dir(const RunConfig& config, const RunOptions& options) {
  if (!options.out_dir.empty()) return options.out_dir;
  if (!config.output.dir.empty()) return config.output.dir;
  return default_output_root() / config.experiment;
}

void write_failure(const fs::path& dir, const RunConfig& config, const std::string& kind, const std::string& message,
                   json extra) {
  json report = {{"experiment", config.experiment}, {"version", version()}, {"seed", config.mc.seed},
                 {"status", kind},                  {"message", message}, {"details", std::move(extra)}};
  write_text(dir / "resolved_config.json", config.resolved.dump(2) + "\n");
  write_text(dir / "report.json", report.dump(2) + "\n");
}

}  // namespace

std::string version() { return CIFLOW_VERSION; }

std::string summary_csv(const std::vector<SummaryRow>& rows, bool timing) {
  std::ostringstream out;
  for (std::size_t i = 0; i < kSummaryColumns.size(); ++i) out << (i ? "," : "") << kSummaryColumns[i];
  out << "\n";
  using io::format_double;
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.N << ',' << r.M << ',' << format_double(r.delta) << ',' << format_double(r.t)
        << ',' << r.n << ',' << format_double(r.err_l2_rel) << ',' << format_double(r.err_hs_rel) << ','
        << format_double(r.mc_se) << ',' << format_double(timing ? r.wall_seconds : 0.0) << "\n";
  }
  return out.str();
}

std::string table_csv(const Table& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << io::format_double(row[i]);
    out << "\n";
  }
  return out.str();
}

json report_json(const RunConfig& config, const ExperimentResult& result) {
  json checks = json::array();
  for (const auto& c : result.checks) checks.push_back(check_json(c));
  return {{"experiment", config.experiment},
          {"version", version()},
          {"seed", config.mc.seed},
          {"status", result.passed() ? "passed" : "failed"},
          {"checks", checks},
          {"details", result.details}};
}

void write_artifacts(const fs::path& dir, const RunConfig& config, const ExperimentResult& result,
                     double wall_seconds, int threads) {
  write_text(dir / "resolved_config.json", config.resolved.dump(2) + "\n");
  write_text(dir / "summary.csv", summary_csv(result.rows, config.output.timing));
  write_text(dir / "report.json", report_json(config, result).dump(2) + "\n");
  for (const auto& t : result.tables) write_text(dir / (t.name + ".csv"), table_csv(t));

  json rows = json::array();
  for (const auto& r : result.rows) rows.push_back({{"experiment", r.experiment}, {"M", r.M}, {"wall_seconds", r.wall_seconds}});
  const json timing = {{"wall_seconds", wall_seconds}, {"threads", threads}, {"rows", rows}};
  write_text(dir / "timing.json", timing.dump(2) + "\n");

  if (config.output.write_fields && !result.fields.empty()) {
    fs::create_directories(dir / "fields");
    for (const auto& f : result.fields) {
      json meta = f.metadata;
      meta["experiment"] = config.experiment;
      meta["name"] = f.name;
      io::write_field(dir / "fields" / (f.name + ".bin"), f.field, meta);
      if (config.output.field_csv) io::write_field_csv(dir / "fields" / (f.name + ".csv"), f.field);
    }
  }
  if (result.flow_dump) write_flow_dump(dir / "flow_dump.bin", *result.flow_dump);
}

int execute(const json& resolved_config, const RunOptions& options) {
  std::ostream& log = options.log ? *options.log : std::cout;
  RunConfig config;
  try {
    config = RunConfig::from_json(resolved_config);
  } catch (const json::exception& e) {
    log << "error: config is not resolved: " << e.what() << "\n";
    return kSchemaViolation;
  }

  const fs::path dir = output_dir(config, options);
  try {
    fs::create_directories(dir);
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory");
  } catch (const std::exception& e) {
    log << "error: cannot use output directory " << dir << ": " << e.what() << "\n";
    return kOutputPathError;
  }

  set_thread_count(options.threads);
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  try {
    result = run_experiment(config);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return e.code();
  } catch (const PicardFailure& e) {
    log << "solver failure: " << e.what() << "\n";
    write_failure(dir, config, "solver_failure", e.what(), {{"residual", e.residual()}, {"time", e.time()}});
    return kSolverFailure;
  } catch (const OuterIterationFailure& e) {
    log << "solver failure: " << e.what() << "\n";
    write_failure(dir, config, "solver_failure", e.what(), {{"deltas", e.deltas()}});
    return kSolverFailure;
  } catch (const PreconditionError& e) {
    log << "error: configuration not supported: " << e.what() << "\n";
    return kSchemaViolation;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    write_artifacts(dir, config, result, seconds, thread_count());
  } catch (const std::exception& e) {
    log << "error: writing artifacts: " << e.what() << "\n";
    return kOutputPathError;
  }

  log << std::setprecision(10);
  for (const auto& c : result.checks)
    log << (c.passed ? "PASS " : "FAIL ") << config.experiment << "." << c.name << ": " << c.value << " "
        << c.relation << " " << c.threshold << "\n";
  log << config.experiment << ": " << (result.passed() ? "passed" : "FAILED") << " in " << seconds << " s -> "
      << dir.string() << "\n";
  return result.passed() ? kOk : kChecksFailed;
}

}  // namespace ciflow::harness
