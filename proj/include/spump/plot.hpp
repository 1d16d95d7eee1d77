#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spump/orchestrator.hpp"

namespace spump {

class CsvError : public std::runtime_error {
 public:
  CsvError(int line, int column, const std::string& what)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Parses the telemetry CSV written by write_telemetry_header/row.
std::vector<TelemetryRecord> read_telemetry_csv(std::string_view text);

// One panel per pump: commanded volume (blue) and voxel pressure (red, own
// scale) against time. Each panel carries its axis mapping as data-*
// attributes so the curves can be read back.
std::string render_plot_svg(const std::vector<TelemetryRecord>& records);

}  // namespace spump
