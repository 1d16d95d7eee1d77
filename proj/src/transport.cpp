#include "spump/transport.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <termios.h>
#include <unistd.h>

#include <fmt/format.h>

#include "spump/error.hpp"

namespace spump {

namespace {

speed_t baud_constant(unsigned baud) {
  switch (baud) {
    case 9600: return B9600;
    case 19200: return B19200;
    case 38400: return B38400;
    case 57600: return B57600;
    case 115200: return B115200;
    case 230400: return B230400;
    case 460800: return B460800;
    case 921600: return B921600;
    default:
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("unsupported baud rate {}", baud));
  }
}

std::string os_error(const char* what) {
  return fmt::format("{}: {}", what, std::strerror(errno));
}

}  // namespace

PosixSerialPort::PosixSerialPort(const std::string& path, unsigned baud) {
  const speed_t speed = baud_constant(baud);
  fd_ = ::open(path.c_str(), O_RDWR | O_NOCTTY | O_CLOEXEC);
  if (fd_ < 0) throw Error(ErrorCode::Io, os_error(("open " + path).c_str()));
  termios tio{};
  if (::tcgetattr(fd_, &tio) != 0) {
    const auto msg = os_error("tcgetattr");
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::Io, msg);
  }
  ::cfmakeraw(&tio);
  tio.c_cflag |= CLOCAL | CREAD;
  tio.c_cflag &= ~static_cast<tcflag_t>(CSTOPB | PARENB);
  ::cfsetispeed(&tio, speed);
  ::cfsetospeed(&tio, speed);
  if (::tcsetattr(fd_, TCSANOW, &tio) != 0) {
    const auto msg = os_error("tcsetattr");
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::Io, msg);
  }
}

std::unique_ptr<PosixSerialPort> PosixSerialPort::adopt(int fd) {
  return std::unique_ptr<PosixSerialPort>(new PosixSerialPort(fd));
}

PosixSerialPort::~PosixSerialPort() { close(); }

void PosixSerialPort::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void PosixSerialPort::write(std::span<const std::uint8_t> bytes) {
  if (fd_ < 0) {
    errno = EBADF;
    throw Error(ErrorCode::WriteFailure, os_error("serial write"));
  }
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(fd_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::WriteFailure, os_error("serial write"));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::size_t PosixSerialPort::read(std::span<std::uint8_t> buffer,
                                  std::chrono::milliseconds timeout) {
  if (fd_ < 0) {
    errno = EBADF;
    throw Error(ErrorCode::Io, os_error("serial read"));
  }
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (ready < 0) {
    if (errno == EINTR) return 0;
    throw Error(ErrorCode::Io, os_error("serial poll"));
  }
  if (ready == 0) return 0;
  const ssize_t n = ::read(fd_, buffer.data(), buffer.size());
  if (n < 0) {
    if (errno == EINTR || errno == EAGAIN) return 0;
    throw Error(ErrorCode::Io, os_error("serial read"));
  }
  return static_cast<std::size_t>(n);
}

}  // namespace spump
