#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

namespace spump {

// Byte pipe to the pump bus. Implementations throw Error(WriteFailure/Io).
class Transport {
 public:
  virtual ~Transport() = default;

  virtual void write(std::span<const std::uint8_t> bytes) = 0;
  // Blocks up to `timeout`; returns 0 when nothing arrived.
  virtual std::size_t read(std::span<std::uint8_t> buffer,
                           std::chrono::milliseconds timeout) = 0;
  virtual void close() = 0;
  virtual bool is_open() const = 0;
};

// Raw 8N1 termios port.
class PosixSerialPort : public Transport {
 public:
  PosixSerialPort(const std::string& path, unsigned baud);
  ~PosixSerialPort() override;

  PosixSerialPort(const PosixSerialPort&) = delete;
  PosixSerialPort& operator=(const PosixSerialPort&) = delete;

  void write(std::span<const std::uint8_t> bytes) override;
  std::size_t read(std::span<std::uint8_t> buffer,
                   std::chrono::milliseconds timeout) override;
  void close() override;
  bool is_open() const override { return fd_ >= 0; }

  // Wraps an already open descriptor (e.g. a pty); takes ownership.
  static std::unique_ptr<PosixSerialPort> adopt(int fd);

 private:
  explicit PosixSerialPort(int fd) : fd_(fd) {}

  int fd_ = -1;
};

}  // namespace spump
