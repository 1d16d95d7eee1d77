#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spump {

enum class Opcode : std::uint8_t {
  Configure = 0x01,
  SetWaveform = 0x02,
  Start = 0x03,
  Stop = 0x04,
  Home = 0x05,
  StatusReq = 0x06,
  Ack = 0x80,
  Nack = 0x81,
  Telemetry = 0x82,
};

std::optional<Opcode> opcode_from_byte(std::uint8_t byte);
std::string_view to_string(Opcode op);

inline constexpr std::uint8_t kBroadcastId = 0xFF;
inline constexpr std::uint8_t kStartOfFrame = 0x7E;
inline constexpr std::uint8_t kEscape = 0x7D;
inline constexpr std::uint8_t kEscapeXor = 0x20;
inline constexpr std::size_t kMaxPayload = 64;

// One host <-> pump message. Payload length is checked on construction.
class Frame {
 public:
  Frame(std::uint8_t pump_id, Opcode opcode,
        std::vector<std::uint8_t> payload = {});

  std::uint8_t pump_id() const { return pump_id_; }
  Opcode opcode() const { return opcode_; }
  const std::vector<std::uint8_t>& payload() const { return payload_; }
  bool is_broadcast() const { return pump_id_ == kBroadcastId; }

  // CRC over pump_id, opcode, length and payload.
  std::uint16_t crc() const;

  bool operator==(const Frame&) const = default;

 private:
  std::uint8_t pump_id_;
  Opcode opcode_;
  std::vector<std::uint8_t> payload_;
};

// SOF, then the byte-stuffed body: pump_id, opcode, length, payload, crc
// (big-endian).
std::vector<std::uint8_t> encode_frame(const Frame& frame);

enum class DecodeError {
  CrcMismatch,
  LengthOverflow,
  UnknownOpcode,
  EscapeError,
  TruncatedFrame,  // SOF inside a frame body
  UnsyncedBytes,   // bytes outside any frame, dropped
  LengthMismatch,  // frame end not followed by SOF while more bytes wait
};

std::string_view to_string(DecodeError error);

struct DecodeResult {
  enum class Status { Ok, NeedMore, Error };

  Status status = Status::NeedMore;
  std::optional<Frame> frame;
  DecodeError error = DecodeError::CrcMismatch;
  // Bytes the caller may drop from the front of its buffer.
  std::size_t consumed = 0;
};

// Decodes the first frame in `bytes`. Bytes before the first SOF are dropped
// and reported as UnsyncedBytes. A frame whose end is followed by anything
// other than SOF is rejected, which catches length bytes corrupted to a
// shorter value whenever the trailing bytes are already buffered.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

// Buffers a byte stream and yields frames and errors in order.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);

  // nullopt when the buffered bytes hold no complete frame yet.
  std::optional<DecodeResult> next();

  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::vector<std::uint8_t> buffer_;
};

std::string hex_bytes(std::span<const std::uint8_t> bytes);

}  // namespace spump
