#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace spump {

enum class Shape { Sine, Trapezoid, Square };

std::string_view to_string(Shape shape);
std::optional<Shape> shape_from_string(std::string_view name);

// One pump's periodic displaced-volume pattern. Volumes in mL, period in s,
// duty/phase/ramp as fractions of a period.
//
// A Sine with duty other than 0.5 is the asymmetric sine: a rising
// half-cosine over the first `duty` of the period and a falling one over the
// rest.
struct WaveformSpec {
  Shape shape = Shape::Sine;
  double period = 1.0;
  double amplitude = 0.0;
  double duty = 0.5;
  double phase = 0.0;
  double offset = 0.0;
  double ramp = 0.125;
  std::optional<std::uint32_t> cycles;  // nullopt = continuous

  // Throws Error(InvalidArgument) naming the first violated invariant.
  void check() const;

  bool operator==(const WaveformSpec&) const = default;
};

// Default trapezoid ramp for a given duty: a quarter of the shorter segment.
double default_ramp(double duty);

// Unit shape g(u) for u in [0,1).
double unit_shape(const WaveformSpec& wave, double u);

// Fraction of the period at time t (phase included), in [0,1).
double cycle_position(const WaveformSpec& wave, double t);

double target_volume(const WaveformSpec& wave, double t);

// Max |dV/dt| in mL/s. Throws Error(UnboundedSlew) for Square.
double peak_flow(const WaveformSpec& wave);

struct VolumeSample {
  double t;
  double volume;
};

std::vector<VolumeSample> sample(const WaveformSpec& wave, double tick,
                                 double horizon);

// Number of whole ticks in [0, horizon], tolerant to representation error
// in horizon/tick (e.g. 0.3/0.1).
std::int64_t tick_count(double horizon, double tick);

}  // namespace spump
