// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <random>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "corpus.hpp"
#include "frames.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"
#include "spump/crc.hpp"
#include "spump/frame.hpp"
#include "spump/kinematics.hpp"
#include "spump/motion.hpp"
#include "spump/orchestrator.hpp"
#include "spump/plant.hpp"

using namespace spump;
using clock_type = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int n, const char* title, const std::function<Verdict()>& body) {
  const auto t0 = clock_type::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, fmt::format("threw: {}", e.what())};
  }
  const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();
  if (!v.pass) ++failures;
  fmt::print("{} criterion {:>2}: {} [{}] ({:.3f} s)\n", v.pass ? "PASS" : "FAIL", n, title,
             v.detail, secs);
  std::fflush(stdout);
}

double since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// Every state's gas total against the first, relative.
double conservation_drift(const std::vector<PlantState>& traj) {
  double worst = 0.0;
  const double g0 = traj.front().total_gas();
  for (const auto& s : traj) worst = std::max(worst, std::abs(s.total_gas() - g0) / g0);
  return worst;
}

Verdict kinematics_round_trip() {
  const auto t0 = clock_type::now();
  std::mt19937_64 rng(1);
  double worst = 0.0;  // error in units of one microstep volume
  for (int i = 0; i < 100000; ++i) {
    const PumpConfig c = gen::random_pump(rng);
    const double cap = capacity_ml(c.syringe);
    const double dv = gen::uniform(rng, -cap, cap);
    const auto q = travel_to_steps(c.drive, volume_to_travel(c.syringe, dv));
    const double back = steps_to_volume(c, q.steps);
    worst = std::max(worst, std::abs(back - dv) / microstep_volume(c));
  }
  const double secs = since(t0);
  return {worst <= 1.0 && secs < 5.0,
          fmt::format("1e5 pairs, worst error {:.4f} microstep volumes, {:.3f} s of 5 s", worst, secs)};
}

Verdict zero_drift() {
  const auto t0 = clock_type::now();
  std::mt19937_64 rng(2);
  const double tick = 1e-3;
  std::int64_t worst = 0;
  std::size_t clamped = 0;
  for (int i = 0; i < 100; ++i) {
    const auto [c, w] = gen::random_lockstep_pair(rng, tick, 1000);
    const auto period_ticks = std::llround(w.period / tick);
    const auto tl = track(c, w, tick, static_cast<double>(1000 * period_ticks) * tick);
    clamped += tl.clamped_ticks;
    PulseCursor cur(tl);
    const std::int64_t at_end = cur.advance_to(static_cast<double>(1000 * period_ticks) * tick);
    worst = std::max(worst, std::abs(at_end - tl.origin));
  }
  const double secs = since(t0);
  return {worst == 0 && secs < 60.0,
          fmt::format("100 pairs x 1000 periods, worst drift {} steps, {} slew-limited ticks, "
                      "{:.3f} s of 60 s",
                      worst, clamped, secs)};
}

Verdict bidirectionality() {
  // 100 mm^2 plunger, 400 steps/mm: 10 mL is 40000 steps.
  PumpConfig p;
  p.syringe = {2.0 * std::sqrt(100.0 / M_PI), 250.0, 0.0};
  p.drive = {8.0, 200, 16, 1e6, 1e9, false};
  PlantConfig rigid;
  rigid.ambient_pressure = 101325;
  rigid.syringe_initial_gas_volume = 40;
  rigid.voxel_rest_volume = 20;
  const auto start = init_plant(rigid, 100);
  const double pull = step_plant(start, rigid, p, -40000, 1e-3).voxel_pressure;
  const double push = step_plant(start, rigid, p, 40000, 1e-3).voxel_pressure;
  const double pull_err = std::abs(pull - 86850.0) / 86850.0;
  const double push_err = std::abs(push - 121590.0) / 121590.0;
  return {pull_err <= 1e-3 && push_err <= 1e-3,
          fmt::format("pull {:.3f} kPa (err {:.2e}), push {:.3f} kPa (err {:.2e}), tol 1e-3",
                      pull / 1000, pull_err, push / 1000, push_err)};
}

Verdict conservation() {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  std::size_t states = 0, runs = 0;
  for (int i = 0; i < 60; ++i) {
    const PumpConfig c = gen::random_pump(rng);
    const WaveformSpec w = gen::random_feasible_wave(rng, c, 1e-3, 20000);
    PlantConfig plant;
    plant.syringe_initial_gas_volume = capacity_ml(c.syringe) + gen::uniform(rng, 1, 30);
    plant.voxel_rest_volume = gen::uniform(rng, 2, 40);
    plant.voxel_compliance = i % 3 == 0 ? 0.0 : std::pow(10.0, gen::uniform(rng, -6, -3));
    plant.tube_resistance = i % 4 == 0 ? 0.0 : std::pow(10.0, gen::uniform(rng, 0, 3));
    plant.tube_volume = gen::uniform(rng, 0, 3);
    const auto tl = track(c, w, 1e-3, 2 * w.period);
    const auto traj = simulate(plant, c, tl, 1e-3);
    worst = std::max(worst, conservation_drift(traj));
    states += traj.size();
    ++runs;
  }
  // Pumps from the shipped three-pump program on the shipped plant.
  const auto prog = scenario::program(corpus::read_file(SPUMP_CONFIG_DIR "/three_pump_silibot.gait"));
  const auto plants = parse_plants(corpus::read_file(SPUMP_CONFIG_DIR "/plants.cfg"));
  for (const auto& p : prog.pumps) {
    const auto tl = track(p.config, prog.waves.at(p.config.pump_id), 1e-3, 12);
    const auto traj = simulate(*plants.file->fallback, p.config, tl, 1e-3);
    worst = std::max(worst, conservation_drift(traj));
    states += traj.size();
    ++runs;
  }
  return {worst <= 1e-9,
          fmt::format("{} trajectories, {} states, worst relative drift {:.2e}, tol 1e-9",
                      runs, states, worst)};
}

Verdict bisection() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double C = std::pow(10.0, gen::uniform(rng, -7, -2));
    const double base = gen::uniform(rng, 5, 100);
    const double dv = gen::uniform(rng, -0.8, 0.8) * base;
    const double gas = 101325.0 * (base + dv);
    const double ours = equilibrium_pressure(gas, base, C, 101325.0);
    const double ref = oracle::equilibrium_pressure(gas, base, C, 101325.0);
    worst = std::max(worst, std::abs(ours - ref) / ref);
  }
  return {worst <= 1e-9, fmt::format("1000 cases, worst relative error {:.2e}, tol 1e-9", worst)};
}

Verdict phase_rotation() {
  const auto prog = scenario::program(scenario::three_phase_text(3, 12));
  SimBackend sim(assign_plants(prog, nullptr));
  std::vector<TelemetryRecord> records;
  sim.run(prog, {}, [&](const TelemetryRecord& r) { records.push_back(r); });
  // T/3 = 1 s = 100 telemetry samples.
  const auto rot = scenario::rotation_error(scenario::by_pump(records, 3), 100);
  return {rot.compared > 0 && rot.worst_pressure <= 1e-6 && rot.worst_position == 0,
          fmt::format("{} sample pairs, worst pressure error {:.2e} (tol 1e-6), worst position "
                      "difference {} steps",
                      rot.compared, rot.worst_pressure, rot.worst_position)};
}

Verdict protocol_robustness() {
  std::mt19937_64 rng(7);
  std::size_t mismatches = 0;
  for (int i = 0; i < 100000; ++i) {
    const Frame f = gen::random_frame(rng);
    const auto wire = encode_frame(f);
    const auto r = decode_frame(wire);
    if (r.status != DecodeResult::Status::Ok || !(*r.frame == f) || r.consumed != wire.size())
      ++mismatches;
  }
  std::vector<Frame> corpus;
  for (int i = 0; i < 1000; ++i) corpus.push_back(gen::random_frame(rng));
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<gen::ScanResult>> parts;
  for (unsigned w = 0; w < workers; ++w)
    parts.push_back(std::async(std::launch::async, [&, w] {
      std::vector<Frame> slice;
      for (std::size_t i = w; i < corpus.size(); i += workers) slice.push_back(corpus[i]);
      return gen::corruption_scan(slice);
    }));
  gen::ScanResult scan;
  for (auto& p : parts) {
    const auto s = p.get();
    scan.corruptions += s.corruptions;
    scan.detected += s.detected;
    scan.silent += s.silent;
    scan.lost_sentinel += s.lost_sentinel;
  }
  return {mismatches == 0 && scan.detected == scan.corruptions && scan.silent == 0,
          fmt::format("1e5 round-trips, {} mismatches; {} single-byte corruptions over 1000 "
                      "frames, {} detected, {} silent",
                      mismatches, scan.corruptions, scan.detected, scan.silent)};
}

Verdict crc_oracle() {
  const std::string check = "123456789";
  const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(check.data()),
                                            check.size());
  const auto oracle_value = oracle::crc16_bitwise(bytes);
  const auto library_value = crc16_ccitt_false(bytes);
  std::mt19937_64 rng(8);
  std::size_t disagreements = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::uint8_t> buf(rng() % 300);
    for (auto& b : buf) b = static_cast<std::uint8_t>(rng());
    if (oracle::crc16_bitwise(buf) != crc16_ccitt_false(buf)) ++disagreements;
  }
  return {oracle_value == 0x29B1 && library_value == 0x29B1 && disagreements == 0,
          fmt::format("oracle 0x{:04X}, library 0x{:04X}, {} disagreements on 1e4 buffers",
                      oracle_value, library_value, disagreements)};
}

Verdict dsl_corpus() {
  const auto o = corpus::run(SPUMP_TEST_DATA "/gait");
  std::string detail = fmt::format("valid {}/{} golden, invalid {}/{} positioned", o.valid_ok,
                                   o.valid, o.invalid_ok, o.invalid);
  for (const auto& f : o.failures) detail += "; " + f;
  return {o.valid >= 20 && o.invalid >= 20 && o.valid_ok == o.valid && o.invalid_ok == o.invalid,
          detail};
}

Verdict performance() {
  const auto prog = scenario::program(corpus::read_file(SPUMP_CONFIG_DIR "/three_pump_silibot.gait"));
  const auto plants = parse_plants(corpus::read_file(SPUMP_CONFIG_DIR "/plants.cfg"));
  RunOptions opts;
  opts.tick = 1e-3;
  opts.cadence = 1e-3;  // the plant also steps at 1 kHz
  opts.duration = 60.0;
  const auto t0 = clock_type::now();
  SimBackend sim(assign_plants(prog, &*plants.file));
  std::size_t records = 0;
  const auto report = sim.run(prog, opts, [&](const TelemetryRecord&) { ++records; });
  const double secs = since(t0);
  return {secs < 1.0 && records == 3 * 60001 && report.errors.empty(),
          fmt::format("3 pumps, 60 s at 1 kHz, {} records, {:.3f} s of 1 s", records, secs)};
}

}  // namespace

int main() {
  criterion(1, "kinematics round-trip within one microstep", kinematics_round_trip);
  criterion(2, "zero-drift cycling", zero_drift);
  criterion(3, "bidirectional Boyle pressures", bidirectionality);
  criterion(4, "gas conservation", conservation);
  criterion(5, "compliant equilibrium vs bisection", bisection);
  criterion(6, "phase diversity as T/3 rotations", phase_rotation);
  criterion(7, "protocol round-trip and corruption detection", protocol_robustness);
  criterion(8, "CRC oracle", crc_oracle);
  criterion(9, "DSL corpus", dsl_corpus);
  criterion(10, "performance", performance);
  fmt::print("{}/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
