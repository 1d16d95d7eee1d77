#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "spump/kinematics.hpp"
#include "spump/motion.hpp"

namespace spump {

// Syringe chamber -> tube -> silicone voxel, isothermal ideal gas.
// Gas quantities are carried as P*V (Pa*mL), proportional to n*R*T.
struct PlantConfig {
  double ambient_pressure = 101325.0;      // Pa
  double syringe_initial_gas_volume = 40;  // mL at the seal position
  double voxel_rest_volume = 20;           // mL
  double voxel_compliance = 0.0;           // mL/Pa, 0 = rigid
  double tube_resistance = 0.0;            // Pa*s/mL, 0 = instant equalization
  double tube_volume = 0.0;                // mL, lumped into the voxel side

  void check() const;
  bool operator==(const PlantConfig&) const = default;
};

struct PlantState {
  double t = 0.0;
  double plunger_travel = 0.0;  // mm
  double syringe_pressure = 0.0;
  double syringe_volume = 0.0;
  double voxel_pressure = 0.0;
  double voxel_volume = 0.0;
  double syringe_gas = 0.0;
  double voxel_gas = 0.0;

  double total_gas() const { return syringe_gas + voxel_gas; }
};

// Both chambers at ambient with the plunger at `seal_travel` (mm).
PlantState init_plant(const PlantConfig& config, double seal_travel = 0.0);

// Advances one window of length dt in which `steps` motor-frame pulses were
// issued. Throws PlungerLimit / NonPhysical.
PlantState step_plant(const PlantState& state, const PlantConfig& config,
                      const PumpConfig& pump, std::int64_t steps, double dt);

// Positive pressure P with P * (base_volume + C * (P - ambient)) = gas.
// Throws NonPhysical when none exists.
double equilibrium_pressure(double gas, double base_volume, double compliance,
                            double ambient);

// One state per dt starting at t = 0. The plant is sealed at ambient at
// `seal_travel` and moved to the timeline origin (fully equilibrated) before
// t = 0. Errors are rethrown with the offending timestamp.
std::vector<PlantState> simulate(const PlantConfig& config,
                                 const PumpConfig& pump,
                                 const StepTimeline& timeline, double dt,
                                 double seal_travel = 0.0);

// Moves the plunger to `travel` and lets both chambers equalize.
PlantState reposition_equilibrated(const PlantState& state,
                                   const PlantConfig& config,
                                   const PumpConfig& pump, double travel);

void write_trajectory_csv(std::ostream& out,
                          const std::vector<PlantState>& trajectory);

}  // namespace spump
