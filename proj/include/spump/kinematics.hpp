#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spump/waveform.hpp"

namespace spump {

// Units throughout: mm, mL (1 mL = 1000 mm^3), s, microsteps.

struct SyringeSpec {
  double bore_diameter = 0.0;  // mm
  double max_travel = 0.0;     // mm
  double dead_volume = 0.0;    // mL left at full depression

  void check() const;
  bool operator==(const SyringeSpec&) const = default;
};

struct DriveSpec {
  double lead_screw_pitch = 0.0;  // mm/rev
  std::uint32_t full_steps_per_rev = 200;
  std::uint32_t microstep_factor = 1;
  double max_step_rate = 0.0;  // steps/s
  double max_accel = 0.0;      // steps/s^2
  bool invert_direction = false;

  void check() const;
  bool operator==(const DriveSpec&) const = default;
};

struct PumpConfig {
  std::uint8_t pump_id = 0;
  SyringeSpec syringe;
  DriveSpec drive;
  double soft_limit_margin = 0.0;  // mm

  void check() const;
  bool operator==(const PumpConfig&) const = default;
};

double capacity_ml(const SyringeSpec& syringe);
double steps_per_mm(const DriveSpec& drive);

// mm^2
double plunger_area(const SyringeSpec& syringe);

// Signed: negative volume is withdrawal. Throws StrokeExceeded when
// |dv| > capacity.
double volume_to_travel(const SyringeSpec& syringe, double dv);

struct StepQuantization {
  std::int64_t steps = 0;  // motor frame, invert_direction applied
  double residual = 0.0;   // mm, travel not covered by the logical steps
};

StepQuantization travel_to_steps(const DriveSpec& drive, double travel);

// Motor-frame steps to signed displaced volume (mL).
double steps_to_volume(const PumpConfig& config, std::int64_t steps);

// Volume displaced by one microstep, mL.
double microstep_volume(const PumpConfig& config);

// Maps motor-frame step counts back to logical (+ = push) and vice versa.
inline std::int64_t logical_steps(const DriveSpec& drive, std::int64_t steps) {
  return drive.invert_direction ? -steps : steps;
}

enum class StrokeBound {
  NegativeOffset,
  StrokeExceeded,
  BelowSoftLimit,
  AboveSoftLimit,
};

std::string_view to_string(StrokeBound bound);

struct StrokeViolation {
  StrokeBound bound;
  double margin;  // amount by which the bound is exceeded (mL or mm)
};

struct StrokeReport {
  std::vector<StrokeViolation> violations;

  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

StrokeReport validate_stroke(const PumpConfig& config,
                             const WaveformSpec& wave);

}  // namespace spump
