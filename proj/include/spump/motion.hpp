#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "spump/kinematics.hpp"
#include "spump/waveform.hpp"

namespace spump {

struct StepPulse {
  double t;               // s since the shared epoch
  std::int8_t direction;  // motor frame, +1 / -1
};

// Executable output of planning. Directions are in the motor frame
// (invert_direction already applied); `origin` is the absolute motor-frame
// position at t = 0 and `final_position` the net pulse sum.
struct StepTimeline {
  std::vector<StepPulse> pulses;
  double tick = 1e-3;
  double duration = 0.0;
  std::int64_t origin = 0;
  std::int64_t final_position = 0;
  std::size_t clamped_ticks = 0;  // ticks where slew limiting engaged
};

// Sequential reader over a timeline: absolute position after all pulses
// strictly before t. Calls must use non-decreasing t.
class PulseCursor {
 public:
  explicit PulseCursor(const StepTimeline& timeline)
      : timeline_(&timeline), position_(timeline.origin) {}

  std::int64_t advance_to(double t);
  std::int64_t position() const { return position_; }

 private:
  const StepTimeline* timeline_;
  std::size_t next_ = 0;
  std::int64_t position_;
};

// Logical (+ = push) tracking state between ticks.
struct PlannerState {
  std::int64_t position = 0;  // emitted, logical steps
  double residual = 0.0;      // commanded - position, within [-0.5, 0.5]
  double velocity = 0.0;      // steps/s
};

// Per-tick tracking loop. Follows the exact target while it is within the
// drive's rate and acceleration limits, otherwise slews toward it at those
// limits and snaps back onto the target once reachable. The commanded
// position never runs past [low, high], the range the target spans.
class Tracker {
 public:
  Tracker(const DriveSpec& drive, double tick, double initial_target,
          double initial_velocity, double low, double high);

  // Returns the signed logical step count to emit during this tick.
  std::int64_t step(double target);

  const PlannerState& state() const { return state_; }
  bool last_clamped() const { return last_clamped_; }
  std::int64_t max_steps_per_tick() const { return max_per_tick_; }

 private:
  double stopping_speed(double distance) const;

  double tick_;
  double accel_;
  std::int64_t max_per_tick_;
  double velocity_cap_;
  double commanded_;
  double last_target_;
  double low_;
  double high_;
  bool last_clamped_ = false;
  PlannerState state_;
};

// Logical step target (double) for a waveform at tick index k. Uses integer
// tick arithmetic when the period is a whole number of ticks so that cycle
// boundaries and phase offsets land exactly.
class TargetSampler {
 public:
  TargetSampler(const PumpConfig& config, const WaveformSpec& wave,
                double tick);

  double steps_at(std::int64_t k) const;
  double volume_at(std::int64_t k) const;

 private:
  WaveformSpec wave_;
  double tick_;
  double steps_per_ml_;
  std::int64_t period_ticks_ = 0;  // 0 when period is not a tick multiple
  double phase_ticks_ = 0.0;
};

StepTimeline track(const PumpConfig& config, const WaveformSpec& wave,
                   double tick, double horizon);

// Peak step rate the waveform demands of the drive (steps/s). Throws
// UnboundedSlew for Square.
double required_step_rate(const PumpConfig& config, const WaveformSpec& wave);

StepTimeline plan_move(const DriveSpec& drive, std::int64_t from,
                       std::int64_t to, double tick = 1e-3);

// Closed-form duration of a trapezoidal (or triangular) move of `distance`
// steps.
double move_duration(const DriveSpec& drive, std::int64_t distance);

double slew_limited_flow(const PumpConfig& config);

void write_timeline_csv(std::ostream& out, const StepTimeline& timeline);

}  // namespace spump
