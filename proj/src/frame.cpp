#include "spump/frame.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "spump/crc.hpp"
#include "spump/error.hpp"

namespace spump {

std::optional<Opcode> opcode_from_byte(std::uint8_t byte) {
  switch (byte) {
    case 0x01: case 0x02: case 0x03: case 0x04: case 0x05: case 0x06:
    case 0x80: case 0x81: case 0x82:
      return static_cast<Opcode>(byte);
    default:
      return std::nullopt;
  }
}

std::string_view to_string(Opcode op) {
  switch (op) {
    case Opcode::Configure: return "CONFIGURE";
    case Opcode::SetWaveform: return "SET_WAVEFORM";
    case Opcode::Start: return "START";
    case Opcode::Stop: return "STOP";
    case Opcode::Home: return "HOME";
    case Opcode::StatusReq: return "STATUS_REQ";
    case Opcode::Ack: return "ACK";
    case Opcode::Nack: return "NACK";
    case Opcode::Telemetry: return "TELEMETRY";
  }
  return "?";
}

std::string_view to_string(DecodeError error) {
  switch (error) {
    case DecodeError::CrcMismatch: return "CrcMismatch";
    case DecodeError::LengthOverflow: return "LengthOverflow";
    case DecodeError::UnknownOpcode: return "UnknownOpcode";
    case DecodeError::EscapeError: return "EscapeError";
    case DecodeError::TruncatedFrame: return "TruncatedFrame";
    case DecodeError::UnsyncedBytes: return "UnsyncedBytes";
    case DecodeError::LengthMismatch: return "LengthMismatch";
  }
  return "?";
}

Frame::Frame(std::uint8_t pump_id, Opcode opcode,
             std::vector<std::uint8_t> payload)
    : pump_id_(pump_id), opcode_(opcode), payload_(std::move(payload)) {
  if (payload_.size() > kMaxPayload)
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("payload of {} bytes exceeds {}", payload_.size(),
                            kMaxPayload));
}

std::uint16_t Frame::crc() const {
  const std::uint8_t header[3] = {pump_id_, static_cast<std::uint8_t>(opcode_),
                                  static_cast<std::uint8_t>(payload_.size())};
  return crc16_ccitt_false(payload_, crc16_ccitt_false(header));
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(2 * (frame.payload().size() + 5) + 1);
  out.push_back(kStartOfFrame);
  auto put = [&out](std::uint8_t b) {
    if (b == kStartOfFrame || b == kEscape) {
      out.push_back(kEscape);
      out.push_back(static_cast<std::uint8_t>(b ^ kEscapeXor));
    } else {
      out.push_back(b);
    }
  };
  put(frame.pump_id());
  put(static_cast<std::uint8_t>(frame.opcode()));
  put(static_cast<std::uint8_t>(frame.payload().size()));
  for (std::uint8_t b : frame.payload()) put(b);
  const std::uint16_t crc = frame.crc();
  put(static_cast<std::uint8_t>(crc >> 8));
  put(static_cast<std::uint8_t>(crc & 0xFF));
  return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> bytes) {
  DecodeResult r;
  const auto sof = std::find(bytes.begin(), bytes.end(), kStartOfFrame);
  const auto start = static_cast<std::size_t>(sof - bytes.begin());

  auto fail = [&r](DecodeError e, std::size_t consumed) {
    r.status = DecodeResult::Status::Error;
    r.error = e;
    r.consumed = consumed;
    return r;
  };
  if (start > 0) return fail(DecodeError::UnsyncedBytes, start);
  if (bytes.empty()) return r;

  std::vector<std::uint8_t> body;
  std::size_t expected = 3 + 2;  // grows once the length byte is known
  std::size_t pos = start + 1;
  while (body.size() < expected) {
    if (pos >= bytes.size()) return r;
    std::uint8_t b = bytes[pos];
    if (b == kStartOfFrame) return fail(DecodeError::TruncatedFrame, pos);
    if (b == kEscape) {
      if (pos + 1 >= bytes.size()) return r;
      const std::uint8_t e = bytes[pos + 1];
      if (e == kStartOfFrame) return fail(DecodeError::EscapeError, pos + 1);
      b = static_cast<std::uint8_t>(e ^ kEscapeXor);
      if (b != kStartOfFrame && b != kEscape)
        return fail(DecodeError::EscapeError, pos + 2);
      pos += 2;
    } else {
      pos += 1;
    }
    body.push_back(b);
    if (body.size() == 3) {
      if (body[2] > kMaxPayload) return fail(DecodeError::LengthOverflow, pos);
      expected = 3 + body[2] + 2;
    }
  }

  if (pos < bytes.size() && bytes[pos] != kStartOfFrame)
    return fail(DecodeError::LengthMismatch, pos);

  const std::size_t n = body.size() - 2;
  const auto got = static_cast<std::uint16_t>((body[n] << 8) | body[n + 1]);
  if (crc16_ccitt_false(std::span(body.data(), n)) != got)
    return fail(DecodeError::CrcMismatch, pos);
  const auto op = opcode_from_byte(body[1]);
  if (!op) return fail(DecodeError::UnknownOpcode, pos);

  r.status = DecodeResult::Status::Ok;
  r.frame.emplace(body[0], *op,
                  std::vector<std::uint8_t>(body.begin() + 3, body.begin() + static_cast<std::ptrdiff_t>(n)));
  r.consumed = pos;
  return r;
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<DecodeResult> FrameDecoder::next() {
  DecodeResult r = decode_frame(buffer_);
  buffer_.erase(buffer_.begin(),
                buffer_.begin() + static_cast<std::ptrdiff_t>(r.consumed));
  if (r.status == DecodeResult::Status::NeedMore) return std::nullopt;
  return r;
}

std::string hex_bytes(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size() * 3);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i) out += ' ';
    out += fmt::format("{:02X}", bytes[i]);
  }
  return out;
}

}  // namespace spump
