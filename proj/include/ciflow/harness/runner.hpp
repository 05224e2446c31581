#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ciflow/harness/experiments.hpp"

namespace ciflow::harness {

struct RunOptions {
  std::filesystem::path out_dir;  // empty: output.dir, else <output root>/<experiment>
  int threads = 0;                // 0 keeps the OpenMP default
  std::ostream* log = nullptr;
};

/// Write every artifact of a run under `dir`:
///   resolved_config.json  summary.csv  report.json  timing.json
///   <table>.csv  fields/<name>.bin (+ .bin.json sidecar)  [flow_dump.bin]
void write_artifacts(const std::filesystem::path& dir, const RunConfig& config, const ExperimentResult& result,
                     double wall_seconds, int threads);

/// summary.csv text; wall_seconds is written as 0 unless `timing` is set,
/// keeping the file byte-identical across reruns.
std::string summary_csv(const std::vector<SummaryRow>& rows, bool timing);

std::string table_csv(const Table& table);

json report_json(const RunConfig& config, const ExperimentResult& result);

/// Resolve the output directory, run, write artifacts. Returns an ExitCode;
/// never throws for config, path, or solver problems.
int execute(const json& resolved_config, const RunOptions& options);

std::string version();

}  // namespace ciflow::harness
