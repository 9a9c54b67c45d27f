#include "dshock/app/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "dshock/errors.hpp"

namespace dshock::app {

ConfigError::ConfigError(const std::string& what, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

bool RunConfig::writes(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  throw ConfigError(what, line_of(node));
}

void require_map(const YAML::Node& node, const std::string& name) {
  if (!node.IsMap()) fail(node, "'" + name + "' must be a mapping");
}

void check_keys(const YAML::Node& node, const std::string& name,
                const std::set<std::string>& allowed) {
  for (const auto& item : node) {
    const auto key = item.first.as<std::string>();
    if (!allowed.count(key)) fail(item.first, "unknown key '" + key + "' in '" + name + "'");
  }
}

YAML::Node required(const YAML::Node& parent, const std::string& parent_name,
                    const std::string& key) {
  const YAML::Node node = parent[key];
  if (!node) fail(parent, "'" + parent_name + "' is missing '" + key + "'");
  return node;
}

double read_number(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail(node, "'" + key + "' must be a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail(node, "'" + key + "' must be a number (got '" + node.Scalar() + "')");
  }
}

// Whole numbers may be written as 1000000 or 1e6.
std::uint64_t read_count(const YAML::Node& node, const std::string& key, std::uint64_t minimum) {
  const double value = read_number(node, key);
  if (!(value >= static_cast<double>(minimum)) || value != std::floor(value) || value > 9.0e18) {
    fail(node, "'" + key + "' must be an integer >= " + std::to_string(minimum) + " (got '" +
                   node.Scalar() + "')");
  }
  return static_cast<std::uint64_t>(value);
}

std::string read_string(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail(node, "'" + key + "' must be a string");
  return node.Scalar();
}

template <class Build>
auto build_law(const YAML::Node& node, Build&& build) {
  try {
    return build();
  } catch (const ModelError& e) {
    fail(node, e.what());
  }
}

ArrivalLaw parse_arrivals(const YAML::Node& node) {
  require_map(node, "arrivals");
  const auto type = read_string(required(node, "arrivals", "type"), "type");
  if (type == "exponential") {
    check_keys(node, "arrivals", {"type", "rate"});
    const double rate = read_number(required(node, "arrivals", "rate"), "rate");
    return build_law(node, [&] { return ArrivalLaw::exponential(rate); });
  }
  if (type == "uniform") {
    check_keys(node, "arrivals", {"type", "lower", "upper"});
    const double lower = read_number(required(node, "arrivals", "lower"), "lower");
    const double upper = read_number(required(node, "arrivals", "upper"), "upper");
    return build_law(node, [&] { return ArrivalLaw::uniform(lower, upper); });
  }
  fail(node["type"], "unknown arrival law '" + type + "' (expected exponential or uniform)");
}

ThresholdLaw parse_threshold(const YAML::Node& node) {
  require_map(node, "threshold");
  const auto type = read_string(required(node, "threshold", "type"), "type");
  if (type == "constant") {
    check_keys(node, "threshold", {"type", "value"});
    const double value = read_number(required(node, "threshold", "value"), "value");
    return build_law(node, [&] { return ThresholdLaw::constant(value); });
  }
  if (type == "exponential") {
    check_keys(node, "threshold", {"type", "rate"});
    const double rate = read_number(required(node, "threshold", "rate"), "rate");
    return build_law(node, [&] { return ThresholdLaw::exponential(rate); });
  }
  if (type == "uniform") {
    check_keys(node, "threshold", {"type", "lower", "upper"});
    const double lower = read_number(required(node, "threshold", "lower"), "lower");
    const double upper = read_number(required(node, "threshold", "upper"), "upper");
    return build_law(node, [&] { return ThresholdLaw::uniform(lower, upper); });
  }
  fail(node["type"],
       "unknown threshold law '" + type + "' (expected constant, exponential or uniform)");
}

ModelSpec parse_model(const YAML::Node& node, const std::string& name) {
  require_map(node, name);
  check_keys(node, name, {"k", "arrivals", "threshold"});
  const auto k_node = required(node, name, "k");
  const auto k = read_count(k_node, "k", 1);
  if (k > 100'000) fail(k_node, "'k' must be at most 100000");
  ModelSpec spec;
  spec.k = static_cast<int>(k);
  spec.arrivals = parse_arrivals(required(node, name, "arrivals"));
  spec.threshold = parse_threshold(required(node, name, "threshold"));
  try {
    (void)spec.build();
  } catch (const ModelError& e) {
    fail(node, e.what());
  }
  return spec;
}

void parse_analysis(const YAML::Node& node, RunConfig& out) {
  require_map(node, "analysis");
  check_keys(node, "analysis", {"grid", "inversion_tolerance"});
  if (const auto grid = node["grid"]) {
    require_map(grid, "grid");
    check_keys(grid, "grid", {"min", "max", "points"});
    GridSpec spec;
    spec.min = read_number(required(grid, "grid", "min"), "min");
    spec.max = read_number(required(grid, "grid", "max"), "max");
    spec.points = read_count(required(grid, "grid", "points"), "points", 2);
    try {
      validate_grid(spec);
    } catch (const ConfigError& e) {
      fail(grid, e.what());
    }
    out.grid = spec;
  }
  if (const auto tol = node["inversion_tolerance"]) {
    out.inversion_tolerance = read_number(tol, "inversion_tolerance");
    if (!(out.inversion_tolerance > 0.0) || !(out.inversion_tolerance < 1.0)) {
      fail(tol, "'inversion_tolerance' must lie in (0, 1)");
    }
  }
}

void parse_simulation(const YAML::Node& node, RunConfig& out) {
  require_map(node, "simulation");
  check_keys(node, "simulation", {"runs", "seed", "workers", "histogram_bins", "model"});
  if (const auto n = node["runs"]) out.runs = read_count(n, "runs", 1);
  if (const auto n = node["seed"]) {
    // Seeds span the full 64-bit range, beyond what a double holds exactly.
    const auto text = read_string(n, "seed");
    std::uint64_t seed = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc{} || end != text.data() + text.size()) {
      fail(n, "'seed' must be an unsigned 64-bit integer (got '" + text + "')");
    }
    out.seed = seed;
  }
  if (const auto n = node["workers"]) {
    const auto workers = read_count(n, "workers", 1);
    if (workers > 1024) fail(n, "'workers' must be at most 1024");
    out.workers = static_cast<unsigned>(workers);
  }
  if (const auto n = node["histogram_bins"]) {
    out.histogram_bins = read_count(n, "histogram_bins", 1);
  }
  if (const auto n = node["model"]) out.simulation_model = parse_model(n, "simulation.model");
}

void parse_output(const YAML::Node& node, RunConfig& out) {
  require_map(node, "output");
  check_keys(node, "output", {"directory", "formats"});
  if (const auto dir = node["directory"]) out.directory = read_string(dir, "directory");
  if (const auto formats = node["formats"]) {
    if (!formats.IsSequence()) fail(formats, "'formats' must be a list");
    out.formats.clear();
    for (const auto& item : formats) {
      const auto name = read_string(item, "formats");
      if (name != "json" && name != "csv") {
        fail(item, "unknown output format '" + name + "' (expected json or csv)");
      }
      if (!out.writes(name)) out.formats.push_back(name);
    }
  }
}

void emit_model(YAML::Emitter& out, const ModelSpec& model) {
  out << YAML::BeginMap;
  out << YAML::Key << "k" << YAML::Value << model.k;
  out << YAML::Key << "arrivals" << YAML::Value << YAML::BeginMap;
  std::visit(
      [&out](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, ExponentialArrival>) {
          out << YAML::Key << "type" << YAML::Value << "exponential";
          out << YAML::Key << "rate" << YAML::Value << law.rate;
        } else {
          out << YAML::Key << "type" << YAML::Value << "uniform";
          out << YAML::Key << "lower" << YAML::Value << law.lower;
          out << YAML::Key << "upper" << YAML::Value << law.upper;
        }
      },
      model.arrivals.params());
  out << YAML::EndMap;
  out << YAML::Key << "threshold" << YAML::Value << YAML::BeginMap;
  std::visit(
      [&out](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, ConstantThreshold>) {
          out << YAML::Key << "type" << YAML::Value << "constant";
          out << YAML::Key << "value" << YAML::Value << law.value;
        } else if constexpr (std::is_same_v<T, ExponentialThreshold>) {
          out << YAML::Key << "type" << YAML::Value << "exponential";
          out << YAML::Key << "rate" << YAML::Value << law.rate;
        } else {
          out << YAML::Key << "type" << YAML::Value << "uniform";
          out << YAML::Key << "lower" << YAML::Value << law.lower;
          out << YAML::Key << "upper" << YAML::Value << law.upper;
        }
      },
      model.threshold.params());
  out << YAML::EndMap;
  out << YAML::EndMap;
}

}  // namespace

void validate_grid(const GridSpec& grid) {
  if (!(grid.min > 0.0) || !std::isfinite(grid.min)) {
    throw ConfigError("grid minimum must be positive and finite", 0);
  }
  if (!(grid.max > grid.min) || !std::isfinite(grid.max)) {
    throw ConfigError("grid maximum must be finite and exceed the minimum", 0);
  }
  if (grid.points < 2 || grid.points > 1'000'000) {
    throw ConfigError("grid needs between 2 and 1000000 points", 0);
  }
}

GridSpec parse_grid(std::string_view text) {
  const auto bad = [&]() {
    return ConfigError("--grid expects MIN:MAX:POINTS (got '" + std::string(text) + "')", 0);
  };
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t colon; (colon = text.find(':', start)) != std::string_view::npos;
       start = colon + 1) {
    parts.push_back(text.substr(start, colon - start));
  }
  parts.push_back(text.substr(start));
  if (parts.size() != 3) throw bad();

  GridSpec grid;
  const auto number = [&](std::string_view part, double& value) {
    const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || end != part.data() + part.size()) throw bad();
  };
  number(parts[0], grid.min);
  number(parts[1], grid.max);
  const auto [end, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), grid.points);
  if (ec != std::errc{} || end != parts[2].data() + parts[2].size()) throw bad();
  validate_grid(grid);
  return grid;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping with a 'model' block", 1);
  check_keys(root, "configuration", {"model", "analysis", "simulation", "output"});

  RunConfig out;
  out.model = parse_model(required(root, "configuration", "model"), "model");
  if (const auto n = root["analysis"]) parse_analysis(n, out);
  if (const auto n = root["simulation"]) parse_simulation(n, out);
  if (const auto n = root["output"]) parse_output(n, out);
  return out;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file '" + path.string() + "'", 0);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const RunConfig& config) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "model" << YAML::Value;
  emit_model(out, config.model);

  out << YAML::Key << "analysis" << YAML::Value << YAML::BeginMap;
  if (config.grid) {
    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "min" << YAML::Value << config.grid->min;
    out << YAML::Key << "max" << YAML::Value << config.grid->max;
    out << YAML::Key << "points" << YAML::Value << config.grid->points;
    out << YAML::EndMap;
  }
  out << YAML::Key << "inversion_tolerance" << YAML::Value << config.inversion_tolerance;
  out << YAML::EndMap;

  out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "runs" << YAML::Value << config.runs;
  out << YAML::Key << "seed" << YAML::Value << config.seed;
  out << YAML::Key << "workers" << YAML::Value << config.workers;
  out << YAML::Key << "histogram_bins" << YAML::Value << config.histogram_bins;
  if (config.simulation_model) {
    out << YAML::Key << "model" << YAML::Value;
    emit_model(out, *config.simulation_model);
  }
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "directory" << YAML::Value << YAML::DoubleQuoted << config.directory;
  out << YAML::Key << "formats" << YAML::Value << YAML::Flow << config.formats;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace dshock::app
