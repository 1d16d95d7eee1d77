#pragma once

#include <random>
#include <vector>

#include "spump/frame.hpp"

namespace gen {

inline spump::Frame random_frame(std::mt19937_64& rng) {
  static constexpr spump::Opcode ops[] = {
      spump::Opcode::Configure, spump::Opcode::SetWaveform, spump::Opcode::Start,
      spump::Opcode::Stop,      spump::Opcode::Home,        spump::Opcode::StatusReq,
      spump::Opcode::Ack,       spump::Opcode::Nack,        spump::Opcode::Telemetry};
  const auto id = static_cast<std::uint8_t>(rng() & 0xFF);
  const auto op = ops[rng() % 9];
  std::vector<std::uint8_t> payload(rng() % (spump::kMaxPayload + 1));
  // Bias toward the framing bytes so escaping gets exercised.
  for (auto& b : payload) {
    const auto r = rng() % 8;
    b = r == 0 ? 0x7E : r == 1 ? 0x7D : static_cast<std::uint8_t>(rng() & 0xFF);
  }
  return {id, op, std::move(payload)};
}

struct ScanResult {
  std::size_t corruptions = 0;
  std::size_t detected = 0;
  std::size_t silent = 0;          // altered frame delivered with no error
  std::size_t lost_sentinel = 0;   // decoder failed to resync
};

// Every single-byte substitution of every encoded frame, each followed by a
// valid sentinel frame in the same chunk. A corruption counts as detected
// when the decoder reports at least one error, never yields a frame other
// than the sentinel, and still recovers the sentinel.
inline ScanResult corruption_scan(const std::vector<spump::Frame>& corpus) {
  using spump::DecodeResult;
  ScanResult out;
  const spump::Frame sentinel(0x42, spump::Opcode::StatusReq, {});
  const auto tail = spump::encode_frame(sentinel);
  for (const auto& f : corpus) {
    const auto wire = spump::encode_frame(f);
    for (std::size_t i = 0; i < wire.size(); ++i) {
      for (int v = 0; v < 256; ++v) {
        if (v == wire[i]) continue;
        auto bytes = wire;
        bytes[i] = static_cast<std::uint8_t>(v);
        bytes.insert(bytes.end(), tail.begin(), tail.end());
        spump::FrameDecoder dec;
        dec.feed(bytes);
        bool error = false, other = false, got_sentinel = false;
        while (auto r = dec.next()) {
          if (r->status == DecodeResult::Status::Error) {
            error = true;
          } else if (*r->frame == sentinel && !got_sentinel) {
            got_sentinel = true;
          } else {
            other = true;
          }
        }
        ++out.corruptions;
        if (error && !other && got_sentinel) ++out.detected;
        if (other && !error) ++out.silent;
        if (!got_sentinel) ++out.lost_sentinel;
      }
    }
  }
  return out;
}

}  // namespace gen
