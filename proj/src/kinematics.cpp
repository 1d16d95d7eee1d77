#include "spump/kinematics.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "spump/error.hpp"

namespace spump {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, what);
}

bool positive(double v) { return v > 0 && std::isfinite(v); }

}  // namespace

void SyringeSpec::check() const {
  if (!positive(bore_diameter)) invalid("bore_diameter > 0 required");
  if (!positive(max_travel)) invalid("max_travel > 0 required");
  if (!(dead_volume >= 0) || !std::isfinite(dead_volume))
    invalid("dead_volume >= 0 required");
}

void DriveSpec::check() const {
  if (!positive(lead_screw_pitch)) invalid("lead_screw_pitch > 0 required");
  if (full_steps_per_rev == 0) invalid("full_steps_per_rev > 0 required");
  switch (microstep_factor) {
    case 1: case 2: case 4: case 8: case 16: case 32: break;
    default: invalid("microstep_factor must be one of 1,2,4,8,16,32");
  }
  if (!positive(max_step_rate)) invalid("max_step_rate > 0 required");
  if (!positive(max_accel)) invalid("max_accel > 0 required");
}

void PumpConfig::check() const {
  if (pump_id == 0xFF) invalid("pump_id 255 is reserved for broadcast");
  syringe.check();
  drive.check();
  if (!(soft_limit_margin >= 0 && soft_limit_margin < syringe.max_travel / 2))
    invalid("0 <= soft_limit_margin < max_travel/2 required");
}

double plunger_area(const SyringeSpec& s) {
  const double r = s.bore_diameter / 2.0;
  return std::numbers::pi * r * r;
}

double capacity_ml(const SyringeSpec& s) {
  return plunger_area(s) * s.max_travel / 1000.0;
}

double steps_per_mm(const DriveSpec& d) {
  return static_cast<double>(d.full_steps_per_rev) *
         static_cast<double>(d.microstep_factor) / d.lead_screw_pitch;
}

double volume_to_travel(const SyringeSpec& s, double dv) {
  if (std::abs(dv) > capacity_ml(s))
    throw Error(ErrorCode::StrokeExceeded,
                fmt::format("|{} mL| exceeds syringe capacity {} mL", dv,
                            capacity_ml(s)));
  return 1000.0 * dv / plunger_area(s);
}

StepQuantization travel_to_steps(const DriveSpec& d, double travel) {
  const double spmm = steps_per_mm(d);
  // std::round is half-away-from-zero, symmetric for push and pull.
  const double steps = std::round(travel * spmm);
  StepQuantization q;
  q.residual = travel - steps / spmm;
  q.steps = static_cast<std::int64_t>(steps);
  if (d.invert_direction) q.steps = -q.steps;
  return q;
}

double steps_to_volume(const PumpConfig& c, std::int64_t steps) {
  const double travel =
      static_cast<double>(logical_steps(c.drive, steps)) / steps_per_mm(c.drive);
  return travel * plunger_area(c.syringe) / 1000.0;
}

double microstep_volume(const PumpConfig& c) {
  return plunger_area(c.syringe) / steps_per_mm(c.drive) / 1000.0;
}

std::string_view to_string(StrokeBound b) {
  switch (b) {
    case StrokeBound::NegativeOffset: return "NegativeOffset";
    case StrokeBound::StrokeExceeded: return "StrokeExceeded";
    case StrokeBound::BelowSoftLimit: return "BelowSoftLimit";
    case StrokeBound::AboveSoftLimit: return "AboveSoftLimit";
  }
  return "?";
}

std::string StrokeReport::describe() const {
  if (ok()) return "ok";
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    const bool volume = v.bound == StrokeBound::NegativeOffset ||
                        v.bound == StrokeBound::StrokeExceeded;
    out += fmt::format("{} by {:.6g} {}", to_string(v.bound), v.margin,
                       volume ? "mL" : "mm");
  }
  return out;
}

StrokeReport validate_stroke(const PumpConfig& c, const WaveformSpec& w) {
  StrokeReport report;
  const double area = plunger_area(c.syringe);
  const double usable = capacity_ml(c.syringe) - c.syringe.dead_volume;
  const double low = w.offset;
  const double high = w.offset + w.amplitude;

  if (low < 0)
    report.violations.push_back({StrokeBound::NegativeOffset, -low});
  if (high > usable)
    report.violations.push_back({StrokeBound::StrokeExceeded, high - usable});

  const double travel_low = 1000.0 * low / area;
  const double travel_high = 1000.0 * high / area;
  const double min_travel = c.soft_limit_margin;
  const double max_travel = c.syringe.max_travel - c.soft_limit_margin;
  if (travel_low < min_travel)
    report.violations.push_back(
        {StrokeBound::BelowSoftLimit, min_travel - travel_low});
  if (travel_high > max_travel)
    report.violations.push_back(
        {StrokeBound::AboveSoftLimit, travel_high - max_travel});
  return report;
}

}  // namespace spump
