#include "ciflow/harness/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ciflow::harness {

extern const char* const kRunConfigSchema;

namespace {

std::string where_of(const std::string& where) { return where.empty() ? "<root>" : where; }

bool is_integer(const json& v) {
  if (v.is_number_integer()) return true;
  if (!v.is_number_float()) return false;
  const double d = v.get<double>();
  return std::isfinite(d) && std::floor(d) == d;
}

bool type_matches(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "number") return v.is_number();
  if (type == "integer") return is_integer(v);
  if (type == "null") return v.is_null();
  return false;
}

}  // namespace

std::string_view schema_text() { return kRunConfigSchema; }

const json& schema() {
  static const json parsed = json::parse(kRunConfigSchema);
  return parsed;
}

std::vector<std::string> validate(const json& instance, const json& node, const std::string& where) {
  std::vector<std::string> errors;
  auto fail = [&](const std::string& msg) { errors.push_back(where_of(where) + ": " + msg); };

  if (node.contains("type")) {
    const auto type = node["type"].get<std::string>();
    if (!type_matches(instance, type)) {
      fail("expected " + type + ", got " + std::string(instance.type_name()));
      return errors;
    }
  }
  if (node.contains("enum")) {
    bool found = false;
    for (const auto& option : node["enum"]) found = found || option == instance;
    if (!found) fail("value " + instance.dump() + " not in " + node["enum"].dump());
  }
  if (instance.is_number()) {
    const double x = instance.get<double>();
    if (node.contains("minimum") && x < node["minimum"].get<double>())
      fail("value " + instance.dump() + " below minimum " + node["minimum"].dump());
    if (node.contains("maximum") && x > node["maximum"].get<double>())
      fail("value " + instance.dump() + " above maximum " + node["maximum"].dump());
    if (node.contains("exclusiveMinimum") && !(x > node["exclusiveMinimum"].get<double>()))
      fail("value " + instance.dump() + " must exceed " + node["exclusiveMinimum"].dump());
  }
  if (instance.is_object()) {
    if (node.contains("required"))
      for (const auto& key : node["required"])
        if (!instance.contains(key.get<std::string>())) fail("missing required property '" + key.get<std::string>() + "'");
    const json* props = node.contains("properties") ? &node["properties"] : nullptr;
    for (const auto& [key, value] : instance.items()) {
      const std::string child = where.empty() ? key : where + "." + key;
      if (props && props->contains(key)) {
        auto sub = validate(value, (*props)[key], child);
        errors.insert(errors.end(), sub.begin(), sub.end());
      } else if (node.contains("additionalProperties")) {
        const auto& extra = node["additionalProperties"];
        if (extra.is_boolean()) {
          if (!extra.get<bool>()) fail("unknown property '" + key + "'");
        } else {
          auto sub = validate(value, extra, child);
          errors.insert(errors.end(), sub.begin(), sub.end());
        }
      }
    }
  }
  if (instance.is_array()) {
    if (node.contains("minItems") && instance.size() < node["minItems"].get<std::size_t>())
      fail("needs at least " + node["minItems"].dump() + " items");
    if (node.contains("items"))
      for (std::size_t i = 0; i < instance.size(); ++i) {
        auto sub = validate(instance[i], node["items"], where_of(where) + "[" + std::to_string(i) + "]");
        errors.insert(errors.end(), sub.begin(), sub.end());
      }
  }
  return errors;
}

std::vector<std::string> validate_config(const json& config) { return validate(config, schema()); }

namespace {

void fill_defaults(json& instance, const json& node) {
  if (!instance.is_object() || !node.contains("properties")) return;
  for (const auto& [key, sub] : node["properties"].items()) {
    if (!instance.contains(key) && sub.contains("default")) instance[key] = sub["default"];
    if (instance.contains(key)) fill_defaults(instance[key], sub);
  }
}

}  // namespace

json with_defaults(const json& config) {
  json out = config;
  fill_defaults(out, schema());
  return out;
}

void apply_override(json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override must look like key=value: " + std::string(assignment), kUsage);
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &config;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) throw ConfigError("empty path segment in override " + key, kUsage);
    path.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override path " + key + " crosses a non-object", kUsage);
    node = &(*node)[path[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override path " + key + " crosses a non-object", kUsage);
  (*node)[path.back()] = value;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string(), kUsage);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + " is not valid JSON: " + e.what(), kSchemaViolation);
  }
}

json resolve(const json& config) {
  const auto errors = validate_config(config);
  if (!errors.empty()) {
    std::string msg = "config violates the schema:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg, kSchemaViolation);
  }
  return with_defaults(config);
}

std::filesystem::path default_output_root() {
  if (const char* env = std::getenv("CIFLOW_OUTPUT_ROOT"); env && *env) return env;
  return "runs";
}

RunConfig RunConfig::from_json(const json& r) {
  RunConfig c;
  c.resolved = r;
  c.experiment = r.at("experiment").get<std::string>();
  const auto& g = r.at("grid");
  c.grid = {g.at("d").get<int>(), g.at("N").get<int>(), g.at("L").get<double>()};
  const auto& p = r.at("physics");
  c.physics = {p.at("nu").get<double>(), p.at("s").get<double>(), p.at("T").get<double>(), p.at("dt").get<double>()};
  const auto& i = r.at("initial");
  c.initial = {i.at("kind").get<std::string>(), i.at("amplitude").get<double>(), i.at("max_mode").get<int>(),
               i.at("decay").get<double>(),     i.at("seed").get<std::uint64_t>(), i.at("perturbation").get<double>()};
  const auto& s = r.at("solver");
  c.solver = {s.at("picard_tol").get<double>(), s.at("max_picard").get<int>(), s.at("quadrature").get<std::string>(),
              s.at("order_halvings").get<int>(), s.at("order_perturbation").get<double>()};
  const auto& m = r.at("mc");
  c.mc = {m.at("M").get<int>(), m.at("delta").get<double>(), m.at("seed").get<std::uint64_t>(),
          m.at("sample_counts").get<std::vector<int>>(), m.at("replicates").get<int>()};
  const auto& rt = r.at("rate");
  c.rate = {rt.at("enabled").get<bool>(), rt.at("N").get<int>(), rt.at("delta").get<double>(),
            rt.at("sample_counts").get<std::vector<int>>(), rt.at("replicates").get<int>()};
  const auto& mo = r.at("mollify");
  c.mollify = {mo.at("levels").get<std::vector<int>>(), mo.at("fit_pairs").get<int>()};
  const auto& f = r.at("flow");
  c.flow = {f.at("p").get<double>(), f.at("fd_step").get<double>(), f.at("fd_points").get<int>(),
            f.at("dump").get<bool>()};
  const auto& sc = r.at("self_consistent");
  c.self_consistent = {sc.at("outer_tol").get<double>(), sc.at("max_outer").get<int>()};
  const auto& o = r.at("output");
  c.output = {o.at("dir").get<std::string>(), o.at("write_fields").get<bool>(), o.at("field_csv").get<bool>(),
              o.at("timing").get<bool>()};
  c.thresholds = r.at("thresholds");
  return c;
}

double RunConfig::threshold(const std::string& key) const {
  if (!thresholds.contains(key))
    throw ConfigError("experiment " + experiment + " needs thresholds." + key + " in its config", kSchemaViolation);
  return thresholds.at(key).get<double>();
}

std::vector<int> RunConfig::counts() const {
  std::vector<int> out = mc.sample_counts;
  if (out.empty()) out.push_back(mc.M);
  return out;
}

}  // namespace ciflow::harness
