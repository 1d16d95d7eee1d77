#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "spump/gait.hpp"
#include "spump/plant.hpp"
#include "spump/transport.hpp"

namespace spump {

struct TelemetryRecord {
  double t = 0.0;
  std::uint8_t pump_id = 0;
  double commanded_volume = 0.0;         // mL
  std::int64_t position = 0;             // motor-frame steps
  std::optional<double> voxel_pressure;  // Pa, simulation only

  bool operator==(const TelemetryRecord&) const = default;
};

using TelemetrySink = std::function<void(const TelemetryRecord&)>;

struct RunOptions {
  double tick = 1e-3;
  double cadence = 0.01;  // telemetry interval per pump, s
  std::optional<double> duration;  // overrides the program's run line
  unsigned threads = 0;            // sim planning workers; 0 = one per pump
};

struct PumpSummary {
  std::uint8_t pump_id = 0;
  std::string name;
  std::uint64_t cycles_completed = 0;
  std::int64_t max_abs_position = 0;
  std::size_t clamped_ticks = 0;
};

struct ExitReport {
  std::vector<PumpSummary> pumps;
  double end_time = 0.0;
  bool stopped = false;
  std::size_t records = 0;
  std::vector<std::string> errors;

  std::string render() const;
};

// Horizon for a run: the override, else the program's run line, else the
// longest finite wave. Throws InvalidArgument for an unbounded run.
double resolve_horizon(const GaitProgram& program, const RunOptions& options);

class Backend {
 public:
  virtual ~Backend() = default;

  virtual ExitReport run(const GaitProgram& program, const RunOptions& options,
                         const TelemetrySink& sink) = 0;
  // Safe to call from any thread, including from inside the sink.
  virtual void stop_all() = 0;
};

// Simulated pumps, each driving its own plant.
class SimBackend : public Backend {
 public:
  // Plants keyed by pump id.
  explicit SimBackend(std::map<std::uint8_t, PlantConfig> plants);

  ExitReport run(const GaitProgram& program, const RunOptions& options,
                 const TelemetrySink& sink) override;
  void stop_all() override;

 private:
  std::map<std::uint8_t, PlantConfig> plants_;
  std::atomic<bool> running_{false};
  std::atomic<bool> stop_requested_{false};
};

struct SerialOptions {
  std::chrono::milliseconds ack_timeout{500};
  int retries = 2;
};

class SerialBackend : public Backend {
 public:
  SerialBackend(std::unique_ptr<Transport> transport, SerialOptions options = {});

  ExitReport run(const GaitProgram& program, const RunOptions& options,
                 const TelemetrySink& sink) override;
  // Broadcast STOP; no ACK expected.
  void stop_all() override;

  Transport& transport() { return *transport_; }

 private:
  void send(const Frame& frame);
  void await_ack(const Frame& frame);
  void pump_input(std::chrono::milliseconds timeout);

  std::unique_ptr<Transport> transport_;
  SerialOptions options_;
  std::mutex write_mutex_;
  FrameDecoder decoder_;
  std::vector<Frame> inbox_;
  std::atomic<bool> stop_requested_{false};
};

// Plant per declared pump: named entry, else the fallback, else defaults.
std::map<std::uint8_t, PlantConfig> assign_plants(const GaitProgram& program,
                                                  const PlantFile* file);

void write_telemetry_header(std::ostream& out);
void write_telemetry_row(std::ostream& out, const TelemetryRecord& r);

}  // namespace spump
