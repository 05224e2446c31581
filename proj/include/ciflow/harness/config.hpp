#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ciflow::harness {

using nlohmann::json;

enum ExitCode : int {
  kOk = 0,
  kChecksFailed = 1,
  kUsage = 2,
  kSchemaViolation = 3,
  kOutputPathError = 4,
  kSolverFailure = 5,
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int code) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

/// The published run-config schema (the same text as schema/run_config.schema.json).
std::string_view schema_text();
const json& schema();

/// Validation against the schema subset the config uses: type, enum,
/// minimum, maximum, exclusiveMinimum, required, properties,
/// additionalProperties, items, minItems. Returns one message per violation.
std::vector<std::string> validate(const json& instance, const json& schema_node, const std::string& where = "");
std::vector<std::string> validate_config(const json& config);

/// Fill every absent property that declares a default.
json with_defaults(const json& config);

/// "a.b.c=value": value parsed as JSON when possible, otherwise taken as a string.
void apply_override(json& config, std::string_view assignment);

/// Read and parse a config file; ConfigError(kUsage) when unreadable,
/// ConfigError(kSchemaViolation) when not JSON.
json read_config_file(const std::filesystem::path& path);

/// Validate, then fill defaults. Throws ConfigError(kSchemaViolation).
json resolve(const json& config);

/// Default parent directory for outputs: $CIFLOW_OUTPUT_ROOT or ./runs.
std::filesystem::path default_output_root();

struct GridConfig {
  int d = 2;
  int N = 32;
  double L = 0.0;
};

struct PhysicsConfig {
  double nu = 1.0, s = 2.0, T = 0.1, dt = 1e-3;
};

struct InitialConfig {
  std::string kind;
  double amplitude = 1.0;
  int max_mode = 4;
  double decay = 1.0;
  std::uint64_t seed = 0;
  double perturbation = 0.0;
};

struct SolverConfig {
  double picard_tol = 1e-10;
  int max_picard = 50;
  std::string quadrature;
  int order_halvings = 3;
  double order_perturbation = 0.5;
};

struct McConfig {
  int M = 1024;
  double delta = 1e-3;
  std::uint64_t seed = 0;
  std::vector<int> sample_counts;  // empty means {M}
  int replicates = 1;
};

struct RateConfig {
  bool enabled = false;
  int N = 16;
  double delta = 1e-2;
  std::vector<int> sample_counts;
  int replicates = 4;
};

struct MollifyConfig {
  std::vector<int> levels;
  int fit_pairs = 100;
};

struct FlowConfig {
  double p = 2.0;
  double fd_step = 1e-4;
  int fd_points = 4;
  bool dump = false;
};

struct SelfConsistentConfig {
  double outer_tol = 1e-3;
  int max_outer = 10;
};

struct OutputConfig {
  std::string dir;
  bool write_fields = true;
  bool field_csv = false;
  bool timing = false;
};

/// Typed view of a resolved config.
struct RunConfig {
  std::string experiment;
  GridConfig grid;
  PhysicsConfig physics;
  InitialConfig initial;
  SolverConfig solver;
  McConfig mc;
  RateConfig rate;
  MollifyConfig mollify;
  FlowConfig flow;
  SelfConsistentConfig self_consistent;
  OutputConfig output;
  json thresholds;
  json resolved;

  static RunConfig from_json(const json& resolved_config);
  /// Throws ConfigError(kSchemaViolation) when the key is absent.
  double threshold(const std::string& key) const;
  std::vector<int> counts() const;
};

}  // namespace ciflow::harness
