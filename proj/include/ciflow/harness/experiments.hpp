#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ciflow/harness/config.hpp"
#include "ciflow/sde_flow.hpp"

namespace ciflow::harness {

/// One acceptance assertion: passed iff `value relation threshold`.
struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "<", "==", "in"
  double threshold = 0.0;
  bool passed = false;
  std::string note;
};

/// One row of summary.csv; see kSummaryColumns.
struct SummaryRow {
  std::string experiment;
  int N = 0;
  int M = 0;
  double delta = 0.0;
  double t = 0.0;
  int n = 0;
  double err_l2_rel = 0.0;
  double err_hs_rel = 0.0;
  double mc_se = 0.0;
  double wall_seconds = 0.0;
};

inline const std::vector<std::string> kSummaryColumns = {"experiment", "N",          "M",          "delta",
                                                         "t",          "n",          "err_l2_rel", "err_hs_rel",
                                                         "mc_se",      "wall_seconds"};

struct NamedField {
  std::string name;
  VectorField field;
  json metadata = json::object();
};

/// Extra CSV table written next to summary.csv.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<Check> checks;
  std::vector<SummaryRow> rows;
  std::vector<Table> tables;
  json details = json::object();
  std::vector<NamedField> fields;
  std::optional<FlowEndpoints> flow_dump;

  bool passed() const;
};

struct ExperimentInfo {
  std::string name;
  std::string summary;
};

const std::vector<ExperimentInfo>& experiment_catalog();

/// Run the computation named by config.experiment. Solver failures propagate
/// as PicardFailure / OuterIterationFailure; a missing threshold raises
/// ConfigError(kSchemaViolation).
ExperimentResult run_experiment(const RunConfig& config, Execution policy = Execution::Parallel);

Check check_le(std::string name, double value, double threshold, std::string note = "");
Check check_ge(std::string name, double value, double threshold, std::string note = "");
Check check_lt(std::string name, double value, double threshold, std::string note = "");

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ciflow::harness
