#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dshock::app {

/// 17 significant digits with a '.' decimal point regardless of the global
/// locale.
std::string format_number(double value);

/// Comma-separated rows; an empty optional becomes an empty cell. Every row,
/// the last included, ends with '\n'.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<std::optional<double>>& cells);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace dshock::app
