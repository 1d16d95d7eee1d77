#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spump/error.hpp"
#include "spump/waveform.hpp"

using namespace spump;

namespace {

WaveformSpec sine(double period, double amplitude, double phase = 0) {
  WaveformSpec w;
  w.period = period;
  w.amplitude = amplitude;
  w.phase = phase;
  return w;
}

WaveformSpec trapezoid(double period, double amplitude, double duty, double ramp) {
  WaveformSpec w;
  w.shape = Shape::Trapezoid;
  w.period = period;
  w.amplitude = amplitude;
  w.duty = duty;
  w.ramp = ramp;
  return w;
}

WaveformSpec random_wave(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0, 1);
  WaveformSpec w;
  w.shape = static_cast<Shape>(rng() % 3);
  w.period = 0.1 + 10 * u01(rng);
  w.amplitude = 50 * u01(rng);
  w.offset = 5 * u01(rng);
  w.phase = u01(rng) * 0.999;
  w.duty = 0.05 + 0.9 * u01(rng);
  if (w.shape == Shape::Sine && (rng() & 1)) w.duty = 0.5;
  w.ramp = std::min(w.duty, 1 - w.duty) * (0.05 + 0.95 * u01(rng));
  return w;
}

}  // namespace

TEST_CASE("target volume examples") {
  const auto s = sine(2, 10);
  CHECK(target_volume(s, 0) == 0.0);
  CHECK(target_volume(s, 1) == doctest::Approx(10));
  CHECK(target_volume(s, 0.5) == doctest::Approx(5));
  CHECK(target_volume(sine(2, 10, 0.5), 0) == doctest::Approx(10));

  CHECK(target_volume(trapezoid(4, 8, 0.5, 0.25), 0.5) == doctest::Approx(4));

  SUBCASE("asymmetric sine") {
    WaveformSpec w = sine(1, 10);
    w.duty = 0.25;
    CHECK(target_volume(w, 0.125) == doctest::Approx(5));
    CHECK(target_volume(w, 0.25) == doctest::Approx(10));
    CHECK(target_volume(w, 0.625) == doctest::Approx(5));
  }

  SUBCASE("square") {
    WaveformSpec w = sine(2, 3);
    w.shape = Shape::Square;
    w.duty = 0.3;
    CHECK(target_volume(w, 0.0) == 3);
    CHECK(target_volume(w, 0.59) == 3);
    CHECK(target_volume(w, 0.61) == 0);
  }

  SUBCASE("finite cycles park at the offset") {
    WaveformSpec w = sine(2, 10, 0.5);
    w.offset = 1;
    w.cycles = 3;
    CHECK(target_volume(w, 5.9) > 1.0);
    CHECK(target_volume(w, 6.0) == 1.0);
    CHECK(target_volume(w, 100.0) == 1.0);
  }
}

TEST_CASE("peak flow") {
  CHECK(peak_flow(sine(2, 50)) == doctest::Approx(78.5398).epsilon(1e-6));
  CHECK(peak_flow(sine(2, 50)) * 60 / 1000 == doctest::Approx(4.712).epsilon(1e-4));
  CHECK(peak_flow(trapezoid(4, 8, 0.5, 0.25)) == doctest::Approx(8));
  CHECK(peak_flow(sine(2, 0)) == 0.0);

  WaveformSpec sq = sine(1, 1);
  sq.shape = Shape::Square;
  try {
    peak_flow(sq);
    FAIL("expected UnboundedSlew");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnboundedSlew);
  }

  SUBCASE("matches a finite-difference scan") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
      WaveformSpec w = random_wave(rng);
      if (w.shape == Shape::Square) continue;
      const int n = 200000;
      double best = 0;
      for (int k = 0; k < n; ++k) {
        const double t0 = w.period * k / n;
        const double t1 = w.period * (k + 1) / n;
        best = std::max(best, std::abs(target_volume(w, t1) - target_volume(w, t0)) /
                                  (t1 - t0));
      }
      CHECK(best == doctest::Approx(peak_flow(w)).epsilon(1e-4));
    }
  }
}

TEST_CASE("sample") {
  auto one = sample(sine(2, 10), 0.1, 0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].t == 0.0);

  auto s = sample(sine(2, 10), 0.5, 2);
  REQUIRE(s.size() == 5);
  const double expected[] = {0, 5, 10, 5, 0};
  for (int i = 0; i < 5; ++i) {
    CHECK(s[i].t == 0.5 * i);
    CHECK(s[i].volume == doctest::Approx(expected[i]).epsilon(1e-12));
  }

  SUBCASE("length is floor(horizon/tick)+1") {
    CHECK(sample(sine(1, 1), 0.3, 1.0).size() == 4);
    CHECK(sample(sine(1, 1), 0.1, 0.3).size() == 4);
  }

  SUBCASE("each value equals target_volume exactly") {
    const auto w = trapezoid(1.7, 3, 0.4, 0.1);
    for (const auto& v : sample(w, 0.001, 3.4)) CHECK(v.volume == target_volume(w, v.t));
  }

  SUBCASE("trapezoid scan hits both extremes") {
    const auto w = [] {
      auto t = trapezoid(4, 8, 0.5, 0.25);
      t.offset = 2;
      return t;
    }();
    const auto series = sample(w, w.period / 1000, w.period);
    double lo = 1e9, hi = -1e9;
    for (const auto& v : series) {
      lo = std::min(lo, v.volume);
      hi = std::max(hi, v.volume);
    }
    CHECK(hi == w.offset + w.amplitude);
    CHECK(lo == w.offset);
  }

  CHECK_THROWS_AS(sample(sine(1, 1), 0, 1), Error);
  CHECK_THROWS_AS(sample(sine(1, 1), 0.1, -1), Error);
}

TEST_CASE("spec invariants") {
  WaveformSpec w = sine(1, 1);
  CHECK_NOTHROW(w.check());
  w.duty = 1.5;
  CHECK_THROWS_AS(w.check(), Error);
  w = sine(1, 1, 1.0);
  CHECK_THROWS_AS(w.check(), Error);
  w = trapezoid(1, 1, 0.3, 0.31);
  CHECK_THROWS_AS(w.check(), Error);
  w = sine(0, 1);
  CHECK_THROWS_AS(w.check(), Error);
  w = sine(1, -1);
  CHECK_THROWS_AS(w.check(), Error);
  CHECK(default_ramp(0.5) == 0.125);
  CHECK(default_ramp(0.2) == doctest::Approx(0.05));
}

TEST_CASE("waveform properties") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0, 1);

  SUBCASE("periodicity is exact at multiples of the period") {
    for (int i = 0; i < 500; ++i) {
      WaveformSpec w = random_wave(rng);
      w.period = std::ldexp(1.0, static_cast<int>(rng() % 6) - 2);
      const double t = std::ldexp(std::floor(u01(rng) * 1024), -8);
      for (int n = 1; n <= 5; ++n)
        CHECK(target_volume(w, t + n * w.period) == target_volume(w, t));
    }
  }

  SUBCASE("periodicity at arbitrary times") {
    for (int i = 0; i < 500; ++i) {
      WaveformSpec w = random_wave(rng);
      if (w.shape == Shape::Square) continue;
      const double t = 20 * u01(rng);
      CHECK(target_volume(w, t + w.period) ==
            doctest::Approx(target_volume(w, t)).epsilon(1e-9).scale(w.amplitude + 1));
    }
  }

  SUBCASE("phase shift equivalence") {
    // Exact on a dyadic grid.
    for (int i = 0; i < 500; ++i) {
      WaveformSpec w = random_wave(rng);
      w.period = 2;
      w.phase = static_cast<double>(rng() % 8) / 8;
      WaveformSpec z = w;
      z.phase = 0;
      const double t = std::ldexp(static_cast<double>(rng() % 4096), -8);
      CHECK(target_volume(w, t) == target_volume(z, t + w.phase * w.period));
    }
    for (int i = 0; i < 500; ++i) {
      WaveformSpec w = random_wave(rng);
      if (w.shape == Shape::Square) continue;
      WaveformSpec z = w;
      z.phase = 0;
      const double t = 20 * u01(rng);
      CHECK(target_volume(w, t) ==
            doctest::Approx(target_volume(z, t + w.phase * w.period))
                .epsilon(1e-9)
                .scale(w.amplitude + 1));
    }
  }

  SUBCASE("range") {
    for (int i = 0; i < 200; ++i) {
      const WaveformSpec w = random_wave(rng);
      for (int k = 0; k < 200; ++k) {
        const double v = target_volume(w, 30 * u01(rng));
        CHECK(v >= w.offset);
        CHECK(v <= w.offset + w.amplitude);
      }
    }
  }

  SUBCASE("boundary continuity") {
    for (int i = 0; i < 200; ++i) {
      WaveformSpec w = random_wave(rng);
      if (w.shape == Shape::Square) continue;
      CHECK(unit_shape(w, std::nextafter(1.0, 0.0)) == doctest::Approx(unit_shape(w, 0.0)));
      CHECK(unit_shape(w, 0.0) == 0.0);
    }
  }

  SUBCASE("duty semantics") {
    const int n = 100000;
    for (int i = 0; i < 40; ++i) {
      WaveformSpec w = random_wave(rng);
      w.duty = static_cast<double>(1 + rng() % 99) / 100;
      w.ramp = std::min(w.duty, 1 - w.duty) / 2;
      if (w.shape == Shape::Sine) continue;
      int above = 0;
      for (int k = 0; k < n; ++k)
        if (unit_shape(w, (k + 0.5) / n) > 0.5) ++above;
      CHECK(static_cast<double>(above) / n == doctest::Approx(w.duty).epsilon(1e-9));
    }
    WaveformSpec a = sine(1, 1);
    a.duty = 0.3;
    CHECK(unit_shape(a, 0.3) == 1.0);
    CHECK(unit_shape(a, std::nextafter(0.3, 0.0)) == doctest::Approx(1.0));
    CHECK(unit_shape(a, 0.29) < 1.0);
    CHECK(unit_shape(a, 0.31) < 1.0);
  }
}

TEST_CASE("tick count tolerates representation error") {
  CHECK(tick_count(0.3, 0.1) == 3);
  CHECK(tick_count(2.0, 0.001) == 2000);
  CHECK(tick_count(1.0, 0.3) == 3);
  CHECK(tick_count(0, 0.1) == 0);
}
