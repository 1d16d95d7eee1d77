#include "spump/motion.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "spump/error.hpp"

namespace spump {

namespace {

std::int8_t motor_direction(const DriveSpec& drive, std::int64_t logical) {
  const std::int8_t d = logical > 0 ? 1 : -1;
  return drive.invert_direction ? static_cast<std::int8_t>(-d) : d;
}

// Evenly spaced within [start, start + tick), first at half the spacing.
void emit_tick(StepTimeline& tl, const DriveSpec& drive, std::int64_t k,
               std::int64_t count) {
  if (count == 0) return;
  const std::int64_t n = std::abs(count);
  const std::int8_t dir = motor_direction(drive, count);
  for (std::int64_t i = 0; i < n; ++i) {
    const double frac = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    tl.pulses.push_back({tl.tick * (static_cast<double>(k - 1) + frac), dir});
  }
  tl.final_position += dir * n;
}

std::int64_t positive_mod(std::int64_t k, std::int64_t m) {
  const std::int64_t r = k % m;
  return r < 0 ? r + m : r;
}

}  // namespace

std::int64_t PulseCursor::advance_to(double t) {
  const auto& pulses = timeline_->pulses;
  while (next_ < pulses.size() && pulses[next_].t < t) {
    position_ += pulses[next_].direction;
    ++next_;
  }
  return position_;
}

Tracker::Tracker(const DriveSpec& drive, double tick, double initial_target,
                 double initial_velocity, double low, double high)
    : tick_(tick),
      accel_(drive.max_accel),
      max_per_tick_(
          static_cast<std::int64_t>(std::floor(drive.max_step_rate * tick))),
      velocity_cap_(static_cast<double>(max_per_tick_) / tick),
      commanded_(initial_target),
      last_target_(initial_target),
      low_(std::min(low, initial_target)),
      high_(std::max(high, initial_target)) {
  state_.position = static_cast<std::int64_t>(std::round(initial_target));
  state_.residual = commanded_ - static_cast<double>(state_.position);
  // Start inside the braking envelope so the range ends stay reachable.
  state_.velocity =
      std::clamp(initial_velocity,
                 -std::min(velocity_cap_, stopping_speed(commanded_ - low_)),
                 std::min(velocity_cap_, stopping_speed(high_ - commanded_)));
}

double Tracker::stopping_speed(double distance) const {
  // Largest v such that moving at v this tick and then at v - dv, v - 2dv,
  // ... down to rest (dv = accel*tick) covers at most `distance`. With
  // m = floor(v/dv) that distance is tick*((m+1)v - dv*m(m+1)/2).
  const double dv = accel_ * tick_;
  const double c = dv * tick_;
  const double r = std::max(0.0, distance);
  auto reach = [c](double m) { return c * m * (m + 1) / 2; };
  double m = std::floor(std::sqrt(0.25 + 2.0 * r / c) - 0.5);
  while (m > 0 && reach(m) > r) --m;
  while (reach(m + 1) <= r) ++m;
  return (r / tick_ + dv * m * (m + 1) / 2) / (m + 1);
}

std::int64_t Tracker::step(double target) {
  const double dv_max = accel_ * tick_;
  const double v_need = (target - commanded_) / tick_;
  const double slack = 1e-9;
  bool follow = std::abs(v_need) <= velocity_cap_ * (1 + slack) &&
                std::abs(v_need - state_.velocity) <= dv_max * (1 + slack);
  if (follow) {
    // Moving at v_need this tick must leave a stop reachable at the range
    // end; stopping_speed of the room at tick start is exactly that bound.
    const double room = v_need > 0 ? high_ - commanded_ : commanded_ - low_;
    follow = std::abs(v_need) <= stopping_speed(room) * (1 + slack);
  }
  last_clamped_ = !follow;
  if (follow) {
    commanded_ = target;
    state_.velocity = v_need;
  } else {
    // Feed forward the target's own velocity and close the remaining lag no
    // faster than the drive can brake, never heading for the ends of the
    // target range faster than it can stop.
    const double v_ff = (target - last_target_) / tick_;
    const double lag = last_target_ - commanded_;
    const double mag = std::abs(lag);
    double v = v_ff + std::copysign(std::min(stopping_speed(mag), mag / tick_), lag);
    const double up = std::max(0.0, high_ - commanded_);
    const double down = std::max(0.0, commanded_ - low_);
    v = std::clamp(v, -stopping_speed(down), stopping_speed(up));
    v = std::clamp(v, state_.velocity - dv_max, state_.velocity + dv_max);
    v = std::clamp(v, -velocity_cap_, velocity_cap_);
    const double before = commanded_;
    commanded_ = std::clamp(commanded_ + v * tick_, low_, high_);
    state_.velocity = (commanded_ - before) / tick_;
  }
  last_target_ = target;
  const auto rounded = static_cast<std::int64_t>(std::round(commanded_));
  const std::int64_t count =
      std::clamp(rounded - state_.position, -max_per_tick_, max_per_tick_);
  state_.position += count;
  state_.residual = commanded_ - static_cast<double>(state_.position);
  return count;
}

TargetSampler::TargetSampler(const PumpConfig& config,
                             const WaveformSpec& wave, double tick)
    : wave_(wave),
      tick_(tick),
      steps_per_ml_(1000.0 * steps_per_mm(config.drive) /
                    plunger_area(config.syringe)) {
  const double p = wave.period / tick;
  const double p_round = std::round(p);
  if (p_round >= 1 && std::abs(p - p_round) <= 1e-9 * p_round) {
    period_ticks_ = static_cast<std::int64_t>(p_round);
    phase_ticks_ = wave.phase * p_round;
    const double snapped = std::round(phase_ticks_);
    if (std::abs(phase_ticks_ - snapped) <= 1e-9 * p_round)
      phase_ticks_ = snapped;
  }
}

double TargetSampler::volume_at(std::int64_t k) const {
  if (period_ticks_ == 0) {
    return target_volume(wave_, static_cast<double>(k) * tick_);
  }
  if (wave_.cycles && k >= static_cast<std::int64_t>(*wave_.cycles) *
                              period_ticks_)
    return wave_.offset;
  const auto p = static_cast<double>(period_ticks_);
  double num = static_cast<double>(positive_mod(k, period_ticks_)) +
               phase_ticks_;
  if (num >= p) num -= p;
  return wave_.offset + wave_.amplitude * unit_shape(wave_, num / p);
}

double TargetSampler::steps_at(std::int64_t k) const {
  return volume_at(k) * steps_per_ml_;
}

double required_step_rate(const PumpConfig& config, const WaveformSpec& wave) {
  return peak_flow(wave) * 1000.0 / plunger_area(config.syringe) *
         steps_per_mm(config.drive);
}

StepTimeline track(const PumpConfig& config, const WaveformSpec& wave,
                   double tick, double horizon) {
  config.check();
  wave.check();
  if (!(tick > 0)) throw Error(ErrorCode::InvalidArgument, "tick > 0 required");
  if (!(horizon >= 0))
    throw Error(ErrorCode::InvalidArgument, "horizon >= 0 required");

  const StrokeReport stroke = validate_stroke(config, wave);
  if (!stroke.ok())
    throw Error(ErrorCode::StrokeExceeded,
                fmt::format("pump {}: {}", config.pump_id, stroke.describe()));

  const DriveSpec& drive = config.drive;
  if (wave.shape != Shape::Square) {
    const double need = required_step_rate(config, wave);
    if (need > drive.max_step_rate)
      throw Error(ErrorCode::Infeasible,
                  fmt::format("pump {}: waveform requires {:.1f} steps/s, drive "
                              "allows {:.1f} steps/s",
                              config.pump_id, need, drive.max_step_rate));
  }

  const TargetSampler sampler(config, wave, tick);
  const double s0 = sampler.steps_at(0);
  // A square starts at rest; smooth shapes start on their own slope.
  const double v0 =
      wave.shape == Shape::Square ? 0.0 : (s0 - sampler.steps_at(-1)) / tick;
  const double steps_per_ml = 1000.0 * steps_per_mm(drive) / plunger_area(config.syringe);
  Tracker tracker(drive, tick, s0, v0, wave.offset * steps_per_ml,
                  (wave.offset + wave.amplitude) * steps_per_ml);
  if (tracker.max_steps_per_tick() == 0 && wave.amplitude > 0)
    throw Error(ErrorCode::Infeasible,
                fmt::format("pump {}: tick {} s is shorter than one step at "
                            "{} steps/s",
                            config.pump_id, tick, drive.max_step_rate));

  StepTimeline tl;
  tl.tick = tick;
  tl.duration = horizon;
  const std::int64_t logical_origin = tracker.state().position;
  tl.origin = drive.invert_direction ? -logical_origin : logical_origin;

  const std::int64_t ticks = tick_count(horizon, tick);
  for (std::int64_t k = 1; k <= ticks; ++k) {
    const std::int64_t count = tracker.step(sampler.steps_at(k));
    if (tracker.last_clamped()) ++tl.clamped_ticks;
    emit_tick(tl, drive, k, count);
  }
  return tl;
}

double move_duration(const DriveSpec& drive, std::int64_t distance) {
  const double d = static_cast<double>(std::abs(distance));
  if (d == 0) return 0.0;
  const double a = drive.max_accel;
  const double vmax = drive.max_step_rate;
  const double d_acc = vmax * vmax / (2.0 * a);
  if (d >= 2.0 * d_acc) return 2.0 * vmax / a + (d - 2.0 * d_acc) / vmax;
  return 2.0 * std::sqrt(d / a);
}

StepTimeline plan_move(const DriveSpec& drive, std::int64_t from,
                       std::int64_t to, double tick) {
  drive.check();
  StepTimeline tl;
  tl.tick = tick;
  tl.origin = from;
  const std::int64_t distance = to - from;
  if (distance == 0) return tl;

  const std::int64_t n = std::abs(distance);
  const double d = static_cast<double>(n);
  const double a = drive.max_accel;
  const double vmax = drive.max_step_rate;
  const double total = move_duration(drive, distance);
  // Distance covered while accelerating (and, symmetrically, decelerating).
  const double d_acc = std::min(vmax * vmax / (2.0 * a), d / 2.0);
  const double t_acc = std::sqrt(2.0 * d_acc / a);
  const std::int8_t dir = distance > 0 ? 1 : -1;

  tl.pulses.reserve(static_cast<std::size_t>(n));
  // Pulse i fires when the profile's travelled distance reaches i.
  for (std::int64_t i = 1; i <= n; ++i) {
    const double s = static_cast<double>(i);
    double t;
    if (s <= d_acc) {
      t = std::sqrt(2.0 * s / a);
    } else if (s < d - d_acc) {
      t = t_acc + (s - d_acc) / vmax;
    } else {
      t = total - std::sqrt(2.0 * (d - s) / a);
    }
    tl.pulses.push_back({t, dir});
  }
  tl.final_position = distance;
  tl.duration = total;
  return tl;
}

double slew_limited_flow(const PumpConfig& config) {
  return config.drive.max_step_rate / steps_per_mm(config.drive) *
         plunger_area(config.syringe) / 1000.0;
}

void write_timeline_csv(std::ostream& out, const StepTimeline& timeline) {
  out << "timestamp_s,direction\n";
  for (const auto& p : timeline.pulses)
    fmt::print(out, "{:.9f},{}\n", p.t, static_cast<int>(p.direction));
}

}  // namespace spump
