#include "spump/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spump/error.hpp"

namespace spump {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, what);
}

bool is_asymmetric(const WaveformSpec& w) {
  return w.shape == Shape::Sine && w.duty != 0.5;
}

}  // namespace

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::Sine: return "sine";
    case Shape::Trapezoid: return "trapezoid";
    case Shape::Square: return "square";
  }
  return "?";
}

std::optional<Shape> shape_from_string(std::string_view name) {
  if (name == "sine") return Shape::Sine;
  if (name == "trapezoid") return Shape::Trapezoid;
  if (name == "square") return Shape::Square;
  return std::nullopt;
}

void WaveformSpec::check() const {
  if (!(period > 0) || !std::isfinite(period)) invalid("period > 0 required");
  if (!(amplitude >= 0) || !std::isfinite(amplitude))
    invalid("amplitude >= 0 required");
  if (!(duty > 0 && duty < 1)) invalid("0 < duty < 1 required");
  if (!(phase >= 0 && phase < 1)) invalid("0 <= phase < 1 required");
  if (!(offset >= 0) || !std::isfinite(offset)) invalid("offset >= 0 required");
  if (shape == Shape::Trapezoid &&
      !(ramp > 0 && ramp <= std::min(duty, 1.0 - duty)))
    invalid("0 < ramp <= min(duty, 1 - duty) required");
  if (cycles && *cycles == 0) invalid("cycles must be positive");
}

double default_ramp(double duty) { return 0.25 * std::min(duty, 1.0 - duty); }

double unit_shape(const WaveformSpec& w, double u) {
  using std::numbers::pi;
  switch (w.shape) {
    case Shape::Sine:
      if (!is_asymmetric(w)) return (1.0 - std::cos(2.0 * pi * u)) / 2.0;
      if (u < w.duty) return (1.0 - std::cos(pi * u / w.duty)) / 2.0;
      return (1.0 + std::cos(pi * (u - w.duty) / (1.0 - w.duty))) / 2.0;
    case Shape::Trapezoid: {
      const double d = w.duty;
      const double r = w.ramp;
      if (u < r) return u / r;
      if (u < d) return 1.0;
      if (u < d + r) return 1.0 - (u - d) / r;
      return 0.0;
    }
    case Shape::Square:
      return u < w.duty ? 1.0 : 0.0;
  }
  return 0.0;
}

double cycle_position(const WaveformSpec& w, double t) {
  // Reducing t first keeps representable multiples of the period exact.
  double u = std::fmod(t, w.period) / w.period + w.phase;
  if (u < 0.0) u += 1.0;
  if (u >= 1.0) u -= 1.0;
  if (u >= 1.0 || u < 0.0) u = 0.0;
  return u;
}

double target_volume(const WaveformSpec& w, double t) {
  if (w.cycles && t >= static_cast<double>(*w.cycles) * w.period)
    return w.offset;
  return w.offset + w.amplitude * unit_shape(w, cycle_position(w, t));
}

double peak_flow(const WaveformSpec& w) {
  using std::numbers::pi;
  switch (w.shape) {
    case Shape::Sine:
      if (!is_asymmetric(w)) return w.amplitude * pi / w.period;
      // Steepest half-cosine is the shorter segment.
      return w.amplitude * pi /
             (2.0 * std::min(w.duty, 1.0 - w.duty) * w.period);
    case Shape::Trapezoid:
      return w.amplitude / (w.ramp * w.period);
    case Shape::Square:
      break;
  }
  throw Error(ErrorCode::UnboundedSlew,
              "square wave has unbounded nominal slew; use the drive's "
              "slew-limited flow");
}

std::int64_t tick_count(double horizon, double tick) {
  const double n = horizon / tick;
  const double nearest = std::round(n);
  if (std::abs(n - nearest) <= 1e-9 * std::max(1.0, nearest))
    return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::floor(n));
}

std::vector<VolumeSample> sample(const WaveformSpec& wave, double tick,
                                 double horizon) {
  if (!(tick > 0)) throw Error(ErrorCode::InvalidArgument, "tick > 0 required");
  if (!(horizon >= 0))
    throw Error(ErrorCode::InvalidArgument, "horizon >= 0 required");
  const std::int64_t n = tick_count(horizon, tick);
  std::vector<VolumeSample> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  for (std::int64_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * tick;
    out.push_back({t, target_volume(wave, t)});
  }
  return out;
}

}  // namespace spump
