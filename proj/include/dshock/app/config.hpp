#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dshock/distributions.hpp"
#include "dshock/shock_model.hpp"

namespace dshock::app {

/// Rejected configuration. line() is 1-based, 0 when no position applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line);
  int line() const { return line_; }

 private:
  int line_;
};

struct ModelSpec {
  int k = 1;
  ArrivalLaw arrivals = ArrivalLaw::exponential(1.0);
  ThresholdLaw threshold = ThresholdLaw::constant(1.0);

  ShockModel build() const { return ShockModel(k, arrivals, threshold); }
  bool operator==(const ModelSpec&) const = default;
};

struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 0;

  bool operator==(const GridSpec&) const = default;
};

struct RunConfig {
  ModelSpec model;

  // analysis
  std::optional<GridSpec> grid;  // derived from the moments when absent
  double inversion_tolerance = 1e-8;

  // simulation
  std::uint64_t runs = 100'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::size_t histogram_bins = 256;
  // Simulate a different model than the one analysed (negative controls).
  std::optional<ModelSpec> simulation_model;

  // output
  std::string directory = ".";
  std::vector<std::string> formats = {"json", "csv"};

  const ModelSpec& simulated() const { return simulation_model ? *simulation_model : model; }
  bool writes(std::string_view format) const;
  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

/// "MIN:MAX:POINTS", as given on the command line.
GridSpec parse_grid(std::string_view text);
void validate_grid(const GridSpec& grid);

}  // namespace dshock::app
