#pragma once

// Randomized inputs shared by the property tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "spump/kinematics.hpp"
#include "spump/motion.hpp"
#include "spump/waveform.hpp"

namespace gen {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline spump::PumpConfig random_pump(std::mt19937_64& rng) {
  static constexpr std::uint32_t micro[] = {1, 2, 4, 8, 16, 32};
  spump::PumpConfig c;
  c.pump_id = static_cast<std::uint8_t>(rng() % 255);
  c.syringe = {uniform(rng, 4, 40), uniform(rng, 20, 150), 0};
  c.drive.lead_screw_pitch = uniform(rng, 0.5, 8);
  c.drive.full_steps_per_rev = (rng() & 1) ? 200 : 400;
  c.drive.microstep_factor = micro[rng() % 6];
  c.drive.max_step_rate = uniform(rng, 2000, 40000);
  c.drive.max_accel = uniform(rng, 1e4, 1e6);
  c.drive.invert_direction = (rng() & 1) == 1;
  c.soft_limit_margin = uniform(rng, 0, 2);
  return c;
}

// A Sine or Trapezoid whose period is a whole number of ticks, sized to sit
// inside the stroke and below the drive's rate limit. `max_steps` caps the
// amplitude in steps so long runs stay small.
inline spump::WaveformSpec random_feasible_wave(std::mt19937_64& rng,
                                                const spump::PumpConfig& c,
                                                double tick, double max_steps) {
  spump::WaveformSpec w;
  w.shape = (rng() & 1) ? spump::Shape::Sine : spump::Shape::Trapezoid;
  const auto period_ticks = 50 + static_cast<std::int64_t>(rng() % 950);
  w.period = static_cast<double>(period_ticks) * tick;
  w.duty = (w.shape == spump::Shape::Sine && (rng() & 1))
               ? 0.5
               : std::round(uniform(rng, 0.15, 0.85) * 100) / 100;
  w.ramp = std::min(w.duty, 1 - w.duty) * uniform(rng, 0.3, 1.0);
  w.phase = std::floor(uniform(rng, 0, 1) * 12) / 12;

  const double area = spump::plunger_area(c.syringe);
  const double ml_per_mm = area / 1000.0;
  const double spm = spump::steps_per_mm(c.drive);
  const double margin = c.soft_limit_margin;
  const double usable_mm = c.syringe.max_travel - 2 * margin;
  const double offset_mm = margin + uniform(rng, 0, 0.2) * usable_mm;
  w.offset = offset_mm * ml_per_mm;

  double amp_mm = uniform(rng, 0.05, 0.7) * usable_mm;
  amp_mm = std::min(amp_mm, max_steps / spm);
  w.amplitude = amp_mm * ml_per_mm;
  // Keep the peak rate well below the drive limit.
  for (int i = 0; i < 64; ++i) {
    if (spump::required_step_rate(c, w) <= 0.8 * c.drive.max_step_rate) break;
    w.amplitude *= 0.7;
  }
  return w;
}

// Acceleration (steps/s^2) that lets the tracker follow `w` tick by tick
// without slew limiting. Trapezoid corners change velocity within one tick.
inline double lockstep_accel(const spump::PumpConfig& c, const spump::WaveformSpec& w,
                             double tick) {
  const double spml = 1000.0 * spump::steps_per_mm(c.drive) / spump::plunger_area(c.syringe);
  const double a = w.amplitude * spml;
  if (w.shape == spump::Shape::Trapezoid) return a / (w.ramp * w.period) / tick;
  const double half = w.duty == 0.5 ? 0.5 : std::min(w.duty, 1 - w.duty);
  const double omega = M_PI / (half * w.period);
  return 0.5 * a * omega * omega;
}

// A random pump and wave that track with no slew limiting at `tick`.
inline std::pair<spump::PumpConfig, spump::WaveformSpec> random_lockstep_pair(
    std::mt19937_64& rng, double tick, double max_steps) {
  spump::PumpConfig c = random_pump(rng);
  const spump::WaveformSpec w = random_feasible_wave(rng, c, tick, max_steps);
  c.drive.max_accel = std::max(c.drive.max_accel, 1.5 * lockstep_accel(c, w, tick) + 1.0);
  return {c, w};
}

}  // namespace gen
