#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spump/frame.hpp"
#include "spump/kinematics.hpp"
#include "spump/waveform.hpp"

namespace spump {

// Fixed-point wire units. All multi-byte fields are big-endian.
namespace wire {
inline constexpr double kMicrolitresPerMl = 1000.0;
inline constexpr double kMillisPerSecond = 1000.0;
inline constexpr double kMicrometresPerMm = 1000.0;
inline constexpr double kFractionScale = 65536.0;
}  // namespace wire

inline constexpr std::size_t kConfigurePayloadSize = 32;
inline constexpr std::size_t kWaveformPayloadSize = 23;
inline constexpr std::size_t kStartPayloadSize = 4;
inline constexpr std::size_t kTelemetryPayloadSize = 8;

// Throw Error(QuantizationOverflow) when a value does not fit its field.
std::vector<std::uint8_t> encode_configure(const PumpConfig& config);
std::vector<std::uint8_t> encode_waveform(const WaveformSpec& wave);
std::vector<std::uint8_t> encode_start(std::optional<double> run_duration);

// Inverse decoders for the pump side; nullopt on a malformed payload.
std::optional<PumpConfig> decode_configure(std::uint8_t pump_id,
                                           const std::vector<std::uint8_t>& p);
std::optional<WaveformSpec> decode_waveform(const std::vector<std::uint8_t>& p);
std::optional<std::optional<double>> decode_start(
    const std::vector<std::uint8_t>& p);

struct TelemetryPayload {
  std::uint32_t t_ms = 0;
  std::int32_t position = 0;
};

std::vector<std::uint8_t> encode_telemetry(const TelemetryPayload& t);
std::optional<TelemetryPayload> decode_telemetry(
    const std::vector<std::uint8_t>& p);

Frame make_ack(std::uint8_t pump_id, Opcode acked);
Frame make_nack(std::uint8_t pump_id, Opcode rejected, std::uint8_t code);

// Field-by-field rendering of a frame's payload, e.g. "period_ms=2000 ...".
std::string annotate_payload(const Frame& frame);

}  // namespace spump
