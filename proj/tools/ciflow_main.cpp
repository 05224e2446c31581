#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ciflow/harness/runner.hpp"

namespace harness = ciflow::harness;

namespace {

struct Args {
  std::string config;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
  std::string out;
  int threads = 0;
};

// Load, apply --seed/--override, validate and fill defaults.
harness::json load(const Args& args) {
  harness::json cfg = harness::read_config_file(args.config);
  if (!cfg.is_object()) throw harness::ConfigError(args.config + ": top level must be an object", harness::kSchemaViolation);
  for (const auto& o : args.overrides) harness::apply_override(cfg, o);
  if (args.seed >= 0) harness::apply_override(cfg, "mc.seed=" + std::to_string(args.seed));
  return harness::resolve(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ciflow: mild-solution and stochastic-representation Navier-Stokes experiments"};
  app.require_subcommand(1);
  Args args;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", args.config, "run config (JSON)")->required();
  run->add_option("--seed", args.seed, "override mc.seed")->check(CLI::NonNegativeNumber);
  run->add_option("--out", args.out, "output directory (default: output.dir or $CIFLOW_OUTPUT_ROOT/<experiment>)");
  run->add_option("--threads", args.threads, "worker threads (0: OpenMP default); never changes results")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--override", args.overrides, "dotted key=value, repeatable (value parsed as JSON)");

  auto* validate = app.add_subcommand("validate", "check a config against the schema");
  validate->add_option("config", args.config, "run config (JSON)")->required();
  validate->add_option("--override", args.overrides, "dotted key=value, repeatable");
  validate->add_option("--seed", args.seed, "override mc.seed")->check(CLI::NonNegativeNumber);

  auto* list = app.add_subcommand("list-experiments", "list the available experiments");
  auto* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help() << "\nerror: " << e.what() << "\n";
    return harness::kUsage;
  }

  if (*version) {
    std::cout << "ciflow " << harness::version() << "\n";
    return harness::kOk;
  }
  if (*list) {
    for (const auto& e : harness::experiment_catalog()) std::cout << e.name << "\t" << e.summary << "\n";
    return harness::kOk;
  }

  harness::json resolved;
  try {
    resolved = load(args);
  } catch (const harness::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == harness::kUsage) std::cerr << (*run ? run->help() : validate->help());
    return e.code();
  }
  if (*validate) {
    std::cout << args.config << ": valid (" << resolved["experiment"].get<std::string>() << ")\n";
    return harness::kOk;
  }
  harness::RunOptions options;
  options.out_dir = args.out;
  options.threads = args.threads;
  return harness::execute(resolved, options);
}
