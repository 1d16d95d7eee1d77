#pragma once

// Independent reference computations used to freeze expected values. None
// of these share code with the library paths they check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace oracle {

// Bit-at-a-time CRC-16/CCITT-FALSE straight from the polynomial definition.
inline std::uint16_t crc16_bitwise(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : data) {
    for (int bit = 7; bit >= 0; --bit) {
      const bool in = (byte >> bit) & 1;
      const bool top = (crc >> 15) & 1;
      crc = static_cast<std::uint16_t>(crc << 1);
      if (in != top) crc ^= 0x1021;
    }
  }
  return crc;
}

// Root of a monotone increasing f on [lo, hi] by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iterations = 200) {
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 0) break;
  }
  return 0.5 * (lo + hi);
}

// Pressure P > 0 with P * (base + C * (P - ambient)) = gas, by bisection.
inline double equilibrium_pressure(double gas, double base, double compliance,
                                   double ambient) {
  auto f = [&](double p) { return p * (base + compliance * (p - ambient)) - gas; };
  double hi = ambient;
  while (f(hi) < 0) hi *= 2;
  return bisect(f, 0.0, hi);
}

using big = boost::multiprecision::cpp_dec_float_50;

inline big pi50() {
  return big("3.1415926535897932384626433832795028841971693993751");
}

// pi * (bore/2)^2 with the bore given as a decimal string.
inline big circle_area(const std::string& bore) {
  const big r = big(bore) / 2;
  return pi50() * r * r;
}

}  // namespace oracle
