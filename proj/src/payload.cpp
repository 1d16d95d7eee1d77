#include "spump/payload.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "spump/error.hpp"

namespace spump {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v >> 16));
    u16(static_cast<std::uint16_t>(v));
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& p) : p_(p) {}
  std::uint8_t u8() { return p_[pos_++]; }
  std::uint16_t u16() {
    const auto hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }
  std::uint32_t u32() {
    const std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }

 private:
  const std::vector<std::uint8_t>& p_;
  std::size_t pos_ = 0;
};

template <typename T>
T quantize(double value, double scale, const char* field) {
  const double q = std::round(value * scale);
  if (!(q >= 0) || q > static_cast<double>(std::numeric_limits<T>::max()))
    throw Error(ErrorCode::QuantizationOverflow,
                fmt::format("{} = {} does not fit the {}-bit wire field", field,
                            value, 8 * sizeof(T)));
  return static_cast<T>(q);
}

}  // namespace

std::vector<std::uint8_t> encode_configure(const PumpConfig& c) {
  using namespace wire;
  Writer w;
  w.u32(quantize<std::uint32_t>(c.syringe.bore_diameter, kMicrometresPerMm, "bore_mm"));
  w.u32(quantize<std::uint32_t>(c.syringe.max_travel, kMicrometresPerMm, "max_travel_mm"));
  w.u32(quantize<std::uint32_t>(c.syringe.dead_volume, kMicrolitresPerMl, "dead_volume_ml"));
  w.u32(quantize<std::uint32_t>(c.drive.lead_screw_pitch, kMicrometresPerMm, "pitch_mm"));
  w.u16(quantize<std::uint16_t>(c.drive.full_steps_per_rev, 1.0, "steps_per_rev"));
  w.u8(quantize<std::uint8_t>(c.drive.microstep_factor, 1.0, "microsteps"));
  w.u32(quantize<std::uint32_t>(c.drive.max_step_rate, 1.0, "max_step_rate"));
  w.u32(quantize<std::uint32_t>(c.drive.max_accel, 1.0, "max_accel"));
  w.u32(quantize<std::uint32_t>(c.soft_limit_margin, kMicrometresPerMm, "soft_limit_mm"));
  w.u8(c.drive.invert_direction ? 1 : 0);
  return w.take();
}

std::vector<std::uint8_t> encode_waveform(const WaveformSpec& wave) {
  using namespace wire;
  Writer w;
  w.u8(static_cast<std::uint8_t>(wave.shape));
  w.u32(quantize<std::uint32_t>(wave.period, kMillisPerSecond, "period"));
  w.u32(quantize<std::uint32_t>(wave.amplitude, kMicrolitresPerMl, "amplitude_ml"));
  w.u16(quantize<std::uint16_t>(wave.duty, kFractionScale, "duty"));
  w.u16(quantize<std::uint16_t>(wave.phase, kFractionScale, "phase"));
  w.u32(quantize<std::uint32_t>(wave.offset, kMicrolitresPerMl, "offset_ml"));
  w.u16(quantize<std::uint16_t>(wave.ramp, kFractionScale, "ramp"));
  w.u32(wave.cycles.value_or(0));
  return w.take();
}

std::vector<std::uint8_t> encode_start(std::optional<double> run_duration) {
  Writer w;
  w.u32(run_duration ? quantize<std::uint32_t>(*run_duration,
                                               wire::kMillisPerSecond, "run")
                     : 0);
  return w.take();
}

std::optional<PumpConfig> decode_configure(std::uint8_t pump_id,
                                           const std::vector<std::uint8_t>& p) {
  if (p.size() != kConfigurePayloadSize) return std::nullopt;
  Reader r(p);
  PumpConfig c;
  c.pump_id = pump_id;
  c.syringe.bore_diameter = r.u32() / wire::kMicrometresPerMm;
  c.syringe.max_travel = r.u32() / wire::kMicrometresPerMm;
  c.syringe.dead_volume = r.u32() / wire::kMicrolitresPerMl;
  c.drive.lead_screw_pitch = r.u32() / wire::kMicrometresPerMm;
  c.drive.full_steps_per_rev = r.u16();
  c.drive.microstep_factor = r.u8();
  c.drive.max_step_rate = r.u32();
  c.drive.max_accel = r.u32();
  c.soft_limit_margin = r.u32() / wire::kMicrometresPerMm;
  const std::uint8_t flags = r.u8();
  if (flags > 1) return std::nullopt;
  c.drive.invert_direction = flags == 1;
  return c;
}

std::optional<WaveformSpec> decode_waveform(const std::vector<std::uint8_t>& p) {
  if (p.size() != kWaveformPayloadSize) return std::nullopt;
  Reader r(p);
  WaveformSpec w;
  const std::uint8_t shape = r.u8();
  if (shape > static_cast<std::uint8_t>(Shape::Square)) return std::nullopt;
  w.shape = static_cast<Shape>(shape);
  w.period = r.u32() / wire::kMillisPerSecond;
  w.amplitude = r.u32() / wire::kMicrolitresPerMl;
  w.duty = r.u16() / wire::kFractionScale;
  w.phase = r.u16() / wire::kFractionScale;
  w.offset = r.u32() / wire::kMicrolitresPerMl;
  w.ramp = r.u16() / wire::kFractionScale;
  const std::uint32_t cycles = r.u32();
  if (cycles) w.cycles = cycles;
  return w;
}

std::optional<std::optional<double>> decode_start(
    const std::vector<std::uint8_t>& p) {
  if (p.size() != kStartPayloadSize) return std::nullopt;
  Reader r(p);
  const std::uint32_t ms = r.u32();
  if (ms == 0) return std::optional<double>{};
  return std::optional<double>{ms / wire::kMillisPerSecond};
}

std::vector<std::uint8_t> encode_telemetry(const TelemetryPayload& t) {
  Writer w;
  w.u32(t.t_ms);
  w.u32(static_cast<std::uint32_t>(t.position));
  return w.take();
}

std::optional<TelemetryPayload> decode_telemetry(
    const std::vector<std::uint8_t>& p) {
  if (p.size() != kTelemetryPayloadSize) return std::nullopt;
  Reader r(p);
  TelemetryPayload t;
  t.t_ms = r.u32();
  t.position = static_cast<std::int32_t>(r.u32());
  return t;
}

Frame make_ack(std::uint8_t pump_id, Opcode acked) {
  return Frame(pump_id, Opcode::Ack, {static_cast<std::uint8_t>(acked)});
}

Frame make_nack(std::uint8_t pump_id, Opcode rejected, std::uint8_t code) {
  return Frame(pump_id, Opcode::Nack,
               {static_cast<std::uint8_t>(rejected), code});
}

std::string annotate_payload(const Frame& f) {
  const auto& p = f.payload();
  auto raw = [&p] { return p.empty() ? std::string("-") : "raw=" + hex_bytes(p); };
  switch (f.opcode()) {
    case Opcode::Configure: {
      if (p.size() != kConfigurePayloadSize) return raw();
      Reader r(p);
      const auto bore = r.u32();
      const auto travel = r.u32();
      const auto dead = r.u32();
      const auto pitch = r.u32();
      const auto spr = r.u16();
      const auto micro = r.u8();
      const auto rate = r.u32();
      const auto accel = r.u32();
      const auto soft = r.u32();
      const auto flags = r.u8();
      return fmt::format(
          "bore_um={} max_travel_um={} dead_volume_ul={} pitch_um={} "
          "steps_per_rev={} microsteps={} max_step_rate={} max_accel={} "
          "soft_limit_um={} flags={}",
          bore, travel, dead, pitch, spr, micro, rate, accel, soft, flags);
    }
    case Opcode::SetWaveform: {
      if (p.size() != kWaveformPayloadSize) return raw();
      Reader r(p);
      const auto shape = r.u8();
      const auto period = r.u32();
      const auto amp = r.u32();
      const auto duty = r.u16();
      const auto phase = r.u16();
      const auto offset = r.u32();
      const auto ramp = r.u16();
      const auto cycles = r.u32();
      const auto name = shape <= 2 ? to_string(static_cast<Shape>(shape))
                                   : std::string_view("?");
      return fmt::format(
          "shape={}({}) period_ms={} amplitude_ul={} duty={}/65536 "
          "phase={}/65536 offset_ul={} ramp={}/65536 cycles={}",
          name, shape, period, amp, duty, phase, offset, ramp,
          cycles == 0 ? std::string("continuous") : std::to_string(cycles));
    }
    case Opcode::Start: {
      if (p.size() != kStartPayloadSize) return raw();
      Reader r(p);
      const auto ms = r.u32();
      return ms == 0 ? std::string("run_ms=until-stopped")
                     : fmt::format("run_ms={}", ms);
    }
    case Opcode::Telemetry: {
      const auto t = decode_telemetry(p);
      if (!t) return raw();
      return fmt::format("t_ms={} position={}", t->t_ms, t->position);
    }
    case Opcode::Ack:
    case Opcode::Nack: {
      if (p.empty()) return raw();
      const auto op = opcode_from_byte(p[0]);
      std::string s = fmt::format(
          "for={}", op ? to_string(*op) : std::string_view("?"));
      if (f.opcode() == Opcode::Nack && p.size() >= 2)
        s += fmt::format(" code={}", p[1]);
      return s;
    }
    default:
      return raw();
  }
}

}  // namespace spump
