#include "spump/plant.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "spump/error.hpp"

namespace spump {

namespace {

[[noreturn]] void non_physical(const std::string& what) {
  throw Error(ErrorCode::NonPhysical, what);
}

double voxel_base(const PlantConfig& c) {
  return c.voxel_rest_volume + c.tube_volume;
}

void set_voxel(PlantState& s, const PlantConfig& c) {
  s.voxel_pressure = equilibrium_pressure(
      s.voxel_gas, voxel_base(c), c.voxel_compliance, c.ambient_pressure);
  s.voxel_volume = voxel_base(c) +
                   c.voxel_compliance * (s.voxel_pressure - c.ambient_pressure);
}

// Single pressure across both chambers holding all of the gas.
void merge_chambers(PlantState& s, const PlantConfig& c) {
  const double total = s.syringe_gas + s.voxel_gas;
  const double p = equilibrium_pressure(total, s.syringe_volume + voxel_base(c),
                                        c.voxel_compliance, c.ambient_pressure);
  s.syringe_pressure = p;
  s.voxel_pressure = p;
  s.voxel_volume =
      voxel_base(c) + c.voxel_compliance * (p - c.ambient_pressure);
  s.syringe_gas = p * s.syringe_volume;
  s.voxel_gas = total - s.syringe_gas;
}

void move_plunger(PlantState& s, const PumpConfig& pump, double new_travel) {
  // Summed step increments land a rounding error off the stroke ends.
  const double snap = 1e-9 * pump.syringe.max_travel;
  if (std::abs(new_travel) <= snap) new_travel = 0.0;
  if (std::abs(new_travel - pump.syringe.max_travel) <= snap)
    new_travel = pump.syringe.max_travel;
  if (new_travel < 0.0 || new_travel > pump.syringe.max_travel)
    throw Error(ErrorCode::PlungerLimit,
                fmt::format("plunger travel {:.6f} mm outside [0, {}] mm",
                            new_travel, pump.syringe.max_travel));
  const double dtravel = new_travel - s.plunger_travel;
  s.plunger_travel = new_travel;
  s.syringe_volume -= dtravel * plunger_area(pump.syringe) / 1000.0;
  if (!(s.syringe_volume > 0))
    non_physical(fmt::format("syringe gas volume {:.6g} mL is not positive",
                             s.syringe_volume));
  s.syringe_pressure = s.syringe_gas / s.syringe_volume;
}

// Relaxation rate of the pressure difference through the tube, 1/s.
double exchange_rate(const PlantState& s, const PlantConfig& c) {
  const double upstream = std::max(s.syringe_pressure, s.voxel_pressure);
  const double voxel_capacity =
      s.voxel_volume + c.voxel_compliance * s.voxel_pressure;
  return upstream / c.tube_resistance *
         (1.0 / s.syringe_volume + 1.0 / voxel_capacity);
}

// Donor-cell transfer through the tube over h seconds.
bool exchange(PlantState& s, const PlantConfig& c, double h) {
  const double diff = s.syringe_pressure - s.voxel_pressure;
  if (diff == 0.0) return true;
  const double donor = diff > 0 ? s.syringe_pressure : s.voxel_pressure;
  const double moved = diff / c.tube_resistance * h * donor;
  PlantState next = s;
  next.syringe_gas -= moved;
  next.voxel_gas += moved;
  if (!(next.syringe_gas > 0) || !(next.voxel_gas > 0)) return false;
  next.syringe_pressure = next.syringe_gas / next.syringe_volume;
  set_voxel(next, c);
  const double after = next.syringe_pressure - next.voxel_pressure;
  // An explicit step that reverses the difference has overshot.
  if (after != 0.0 && std::signbit(after) != std::signbit(diff)) return false;
  s = next;
  return true;
}

}  // namespace

void PlantConfig::check() const {
  auto fail = [](const char* what) {
    throw Error(ErrorCode::InvalidArgument, what);
  };
  if (!(ambient_pressure > 0)) fail("ambient_pressure > 0 required");
  if (!(syringe_initial_gas_volume > 0))
    fail("syringe_initial_gas_volume > 0 required");
  if (!(voxel_rest_volume > 0)) fail("voxel_rest_volume > 0 required");
  if (!(voxel_compliance >= 0)) fail("voxel_compliance >= 0 required");
  if (!(tube_resistance >= 0)) fail("tube_resistance >= 0 required");
  if (!(tube_volume >= 0)) fail("tube_volume >= 0 required");
}

double equilibrium_pressure(double gas, double base_volume, double compliance,
                            double ambient) {
  if (!(gas > 0)) non_physical("gas content must be positive");
  if (compliance == 0.0) {
    if (!(base_volume > 0)) non_physical("chamber volume must be positive");
    return gas / base_volume;
  }
  // C*P^2 + b*P - gas = 0; roots have product -gas/C < 0, so exactly one
  // is positive. Pick the cancellation-free form for it.
  const double b = base_volume - compliance * ambient;
  const double disc = std::sqrt(b * b + 4.0 * compliance * gas);
  const double p = b >= 0 ? 2.0 * gas / (b + disc) : (disc - b) / (2.0 * compliance);
  if (!(p > 0) || !std::isfinite(p)) non_physical("no positive pressure root");
  return p;
}

PlantState init_plant(const PlantConfig& c, double seal_travel) {
  c.check();
  PlantState s;
  s.plunger_travel = seal_travel;
  s.syringe_pressure = c.ambient_pressure;
  s.syringe_volume = c.syringe_initial_gas_volume;
  s.voxel_pressure = c.ambient_pressure;
  s.voxel_volume = voxel_base(c);
  s.syringe_gas = s.syringe_pressure * s.syringe_volume;
  s.voxel_gas = s.voxel_pressure * s.voxel_volume;
  return s;
}

PlantState reposition_equilibrated(const PlantState& state,
                                   const PlantConfig& config,
                                   const PumpConfig& pump, double travel) {
  PlantState s = state;
  move_plunger(s, pump, travel);
  merge_chambers(s, config);
  return s;
}

PlantState step_plant(const PlantState& state, const PlantConfig& c,
                      const PumpConfig& pump, std::int64_t steps, double dt) {
  if (!(dt > 0)) throw Error(ErrorCode::InvalidArgument, "dt > 0 required");
  PlantState s = state;
  s.t = state.t + dt;
  const double dtravel =
      static_cast<double>(logical_steps(pump.drive, steps)) /
      steps_per_mm(pump.drive);
  move_plunger(s, pump, state.plunger_travel + dtravel);

  if (c.tube_resistance == 0.0) {
    merge_chambers(s, c);
    return s;
  }

  const double gas_before = s.total_gas();
  double remaining = dt;
  int guard = 0;
  while (remaining > 0) {
    double h = remaining;
    while (exchange_rate(s, c) * h > 0.5) h *= 0.5;
    while (!exchange(s, c, h)) {
      h *= 0.5;
      if (++guard > 4096) non_physical("tube exchange failed to converge");
    }
    remaining -= h;
    if (remaining < dt * 1e-12) remaining = 0;
  }
  const double drift = std::abs(s.total_gas() - gas_before) / gas_before;
  if (drift > 1e-9)
    non_physical(fmt::format("gas conservation violated ({:.3g})", drift));
  return s;
}

std::vector<PlantState> simulate(const PlantConfig& config,
                                 const PumpConfig& pump,
                                 const StepTimeline& timeline, double dt,
                                 double seal_travel) {
  config.check();
  pump.check();
  if (!(dt > 0)) throw Error(ErrorCode::InvalidArgument, "dt > 0 required");

  PlantState s = init_plant(config, seal_travel);
  const double origin_travel =
      static_cast<double>(logical_steps(pump.drive, timeline.origin)) /
      steps_per_mm(pump.drive);
  if (origin_travel != seal_travel) {
    try {
      s = reposition_equilibrated(s, config, pump, origin_travel);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("t=0 s: {}", e.what()));
    }
  }

  const std::int64_t windows = tick_count(timeline.duration, dt);
  std::vector<PlantState> out;
  out.reserve(static_cast<std::size_t>(windows + 1));
  out.push_back(s);
  std::size_t next = 0;
  const auto& pulses = timeline.pulses;
  for (std::int64_t j = 1; j <= windows; ++j) {
    const double end = static_cast<double>(j) * dt;
    std::int64_t steps = 0;
    while (next < pulses.size() && pulses[next].t < end) {
      steps += pulses[next].direction;
      ++next;
    }
    try {
      s = step_plant(s, config, pump, steps, dt);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("t={:.6f} s: {}", end, e.what()));
    }
    s.t = end;
    out.push_back(s);
  }
  return out;
}

void write_trajectory_csv(std::ostream& out,
                          const std::vector<PlantState>& trajectory) {
  out << "t_s,travel_mm,p_syringe_pa,p_voxel_pa,v_voxel_ml\n";
  for (const auto& s : trajectory)
    fmt::print(out, "{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", s.t,
               s.plunger_travel, s.syringe_pressure, s.voxel_pressure,
               s.voxel_volume);
}

}  // namespace spump
