#include "spump/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "spump/error.hpp"
#include "spump/motion.hpp"
#include "spump/payload.hpp"

namespace spump {

namespace {

struct PumpRun {
  StepTimeline timeline;
  std::vector<PlantState> trajectory;
};

std::uint64_t cycles_done(const WaveformSpec& wave, double end) {
  auto n = static_cast<std::uint64_t>(std::max<std::int64_t>(0, tick_count(end, wave.period)));
  if (wave.cycles) n = std::min<std::uint64_t>(n, *wave.cycles);
  return n;
}

std::string pump_label(const PumpDecl& p) {
  return fmt::format("pump {} ({})", p.config.pump_id, p.name);
}

}  // namespace

std::string ExitReport::render() const {
  std::string out = fmt::format("pumps: {}  end_time: {:.3f} s  records: {}  stopped: {}\n",
                                pumps.size(), end_time, records,
                                stopped ? "yes" : "no");
  for (const auto& p : pumps)
    out += fmt::format("pump {} ({}): cycles={} max|position|={} clamped_ticks={}\n",
                       p.pump_id, p.name, p.cycles_completed,
                       p.max_abs_position, p.clamped_ticks);
  if (errors.empty()) {
    out += "errors: none\n";
  } else {
    for (const auto& e : errors) out += "error: " + e + "\n";
  }
  return out;
}

double resolve_horizon(const GaitProgram& program, const RunOptions& options) {
  if (options.duration) return *options.duration;
  if (program.run_duration) return *program.run_duration;
  double longest = 0.0;
  for (const auto& [id, wave] : program.waves) {
    if (!wave.cycles)
      throw Error(ErrorCode::InvalidArgument,
                  "run is unbounded (run forever with continuous waves); "
                  "give a duration");
    longest = std::max(longest, static_cast<double>(*wave.cycles) * wave.period);
  }
  return longest;
}

std::map<std::uint8_t, PlantConfig> assign_plants(const GaitProgram& program,
                                                  const PlantFile* file) {
  std::map<std::uint8_t, PlantConfig> out;
  for (const auto& p : program.pumps) {
    PlantConfig c;
    if (file) {
      if (auto it = file->plants.find(p.name); it != file->plants.end())
        c = it->second;
      else if (file->fallback)
        c = *file->fallback;
      else
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("no plant configured for pump '{}'", p.name));
    }
    out.emplace(p.config.pump_id, c);
  }
  return out;
}

SimBackend::SimBackend(std::map<std::uint8_t, PlantConfig> plants)
    : plants_(std::move(plants)) {}

void SimBackend::stop_all() {
  if (running_) stop_requested_ = true;
}

ExitReport SimBackend::run(const GaitProgram& program, const RunOptions& options,
                           const TelemetrySink& sink) {
  if (running_.exchange(true))
    throw Error(ErrorCode::InvalidArgument, "simulation already running");
  stop_requested_ = false;
  struct Reset {
    std::atomic<bool>& flag;
    ~Reset() { flag = false; }
  } reset{running_};

  if (!(options.tick > 0) || !(options.cadence > 0))
    throw Error(ErrorCode::InvalidArgument, "tick and cadence must be > 0");
  const double horizon = resolve_horizon(program, options);
  if (!(horizon >= 0))
    throw Error(ErrorCode::InvalidArgument, "duration must be >= 0");

  const auto& pumps = program.pumps;
  for (const auto& p : pumps)
    if (!plants_.count(p.config.pump_id))
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("{} has no plant configuration", pump_label(p)));

  auto job = [&](std::size_t i) {
    const PumpDecl& p = pumps[i];
    const WaveformSpec& wave = program.waves.at(p.config.pump_id);
    try {
      PumpRun r;
      r.timeline = track(p.config, wave, options.tick, horizon);
      r.trajectory = simulate(plants_.at(p.config.pump_id), p.config,
                              r.timeline, options.cadence);
      return r;
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("{}: {}", pump_label(p), e.what()));
    }
  };

  // Each pump is planned and simulated independently; results are merged in
  // pump order so the outcome does not depend on scheduling.
  std::vector<PumpRun> runs(pumps.size());
  const std::size_t workers =
      options.threads == 0 ? std::max<std::size_t>(pumps.size(), 1)
                           : options.threads;
  std::vector<std::exception_ptr> errors(pumps.size());
  for (std::size_t begin = 0; begin < pumps.size(); begin += workers) {
    const std::size_t end = std::min(pumps.size(), begin + workers);
    if (workers == 1) {
      try {
        runs[begin] = job(begin);
      } catch (...) {
        errors[begin] = std::current_exception();
      }
      continue;
    }
    std::vector<std::future<PumpRun>> futures;
    for (std::size_t i = begin; i < end; ++i)
      futures.push_back(std::async(std::launch::async, job, i));
    for (std::size_t i = begin; i < end; ++i) {
      try {
        runs[i] = futures[i - begin].get();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExitReport report;
  for (const auto& p : pumps)
    report.pumps.push_back({p.config.pump_id, p.name, 0, 0, 0});

  std::vector<PulseCursor> cursors;
  cursors.reserve(runs.size());
  for (const auto& r : runs) cursors.emplace_back(r.timeline);

  const std::int64_t slots = tick_count(horizon, options.cadence);
  for (std::int64_t j = 0; j <= slots; ++j) {
    const double t = static_cast<double>(j) * options.cadence;
    for (std::size_t i = 0; i < pumps.size(); ++i) {
      const std::uint8_t id = pumps[i].config.pump_id;
      TelemetryRecord rec;
      rec.t = t;
      rec.pump_id = id;
      rec.commanded_volume = target_volume(program.waves.at(id), t);
      rec.position = cursors[i].advance_to(t);
      rec.voxel_pressure = runs[i].trajectory[static_cast<std::size_t>(j)].voxel_pressure;
      report.pumps[i].max_abs_position =
          std::max(report.pumps[i].max_abs_position, std::abs(rec.position));
      ++report.records;
      if (sink) sink(rec);
    }
    report.end_time = t;
    if (stop_requested_) {
      report.stopped = j < slots;
      break;
    }
  }
  for (std::size_t i = 0; i < pumps.size(); ++i) {
    report.pumps[i].cycles_completed =
        cycles_done(program.waves.at(pumps[i].config.pump_id), report.end_time);
    report.pumps[i].clamped_ticks = runs[i].timeline.clamped_ticks;
  }
  return report;
}

SerialBackend::SerialBackend(std::unique_ptr<Transport> transport,
                             SerialOptions options)
    : transport_(std::move(transport)), options_(options) {}

void SerialBackend::send(const Frame& frame) {
  std::lock_guard lock(write_mutex_);
  if (!transport_->is_open())
    throw Error(ErrorCode::WriteFailure, "serial write: port is closed");
  transport_->write(encode_frame(frame));
}

void SerialBackend::pump_input(std::chrono::milliseconds timeout) {
  std::uint8_t buf[256];
  const std::size_t n = transport_->read(buf, timeout);
  decoder_.feed(std::span(buf, n));
  while (auto r = decoder_.next()) {
    // Damaged frames are dropped; the decoder has already resynchronized.
    if (r->status == DecodeResult::Status::Ok) inbox_.push_back(*r->frame);
  }
}

void SerialBackend::await_ack(const Frame& frame) {
  using clock = std::chrono::steady_clock;
  const auto op = static_cast<std::uint8_t>(frame.opcode());
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    send(frame);
    const auto deadline = clock::now() + options_.ack_timeout;
    while (true) {
      for (auto it = inbox_.begin(); it != inbox_.end(); ++it) {
        const Frame& f = *it;
        const bool reply = f.opcode() == Opcode::Ack || f.opcode() == Opcode::Nack;
        if (!reply || f.pump_id() != frame.pump_id() || f.payload().empty() ||
            f.payload()[0] != op)
          continue;
        if (f.opcode() == Opcode::Nack) {
          const int code = f.payload().size() > 1 ? f.payload()[1] : 0;
          inbox_.erase(it);
          throw Error(ErrorCode::NackReceived,
                      fmt::format("NackReceived(code {}) from pump {} for {}",
                                  code, frame.pump_id(), to_string(frame.opcode())));
        }
        inbox_.erase(it);
        return;
      }
      inbox_.clear();  // nothing else is expected before START
      const auto now = clock::now();
      if (now >= deadline) break;
      pump_input(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now) +
                 std::chrono::milliseconds(1));
    }
  }
  throw Error(ErrorCode::Timeout,
              fmt::format("Timeout(pump {}, {}) after {} attempts", frame.pump_id(),
                          to_string(frame.opcode()), options_.retries + 1));
}

ExitReport SerialBackend::run(const GaitProgram& program, const RunOptions& options,
                              const TelemetrySink& sink) {
  using clock = std::chrono::steady_clock;
  stop_requested_ = false;
  inbox_.clear();

  const auto frames = compile_gait(program);
  for (const auto& pf : frames)
    for (const auto& f : pf.frames) {
      if (f.is_broadcast())
        send(f);
      else
        await_ack(f);
    }

  ExitReport report;
  std::map<std::uint8_t, std::size_t> index;
  for (const auto& p : program.pumps) {
    index[p.config.pump_id] = report.pumps.size();
    report.pumps.push_back({p.config.pump_id, p.name, 0, 0, 0});
  }
  std::map<std::uint8_t, double> last_t;

  const std::optional<double> horizon =
      options.duration ? options.duration : program.run_duration;
  const auto started = clock::now();
  // Trailing telemetry is collected for one ACK timeout past the horizon.
  const auto grace = std::chrono::duration<double>(options_.ack_timeout);
  while (!stop_requested_) {
    const std::chrono::duration<double> elapsed = clock::now() - started;
    if (horizon && elapsed > std::chrono::duration<double>(*horizon) + grace) break;
    pump_input(std::chrono::milliseconds(20));
    for (const Frame& f : inbox_) {
      if (f.opcode() != Opcode::Telemetry) continue;
      const auto payload = decode_telemetry(f.payload());
      const auto it = index.find(f.pump_id());
      if (!payload || it == index.end()) continue;
      TelemetryRecord rec;
      rec.t = payload->t_ms / wire::kMillisPerSecond;
      rec.pump_id = f.pump_id();
      rec.commanded_volume = target_volume(program.waves.at(f.pump_id()), rec.t);
      rec.position = payload->position;
      if (auto prev = last_t.find(rec.pump_id);
          prev != last_t.end() && rec.t < prev->second) {
        report.errors.push_back(fmt::format(
            "pump {}: telemetry went back in time ({} s after {} s)",
            rec.pump_id, rec.t, prev->second));
        continue;
      }
      last_t[rec.pump_id] = rec.t;
      auto& summary = report.pumps[it->second];
      summary.max_abs_position = std::max(summary.max_abs_position, std::abs(rec.position));
      report.end_time = std::max(report.end_time, rec.t);
      ++report.records;
      if (sink) sink(rec);
    }
    inbox_.clear();
  }
  report.stopped = stop_requested_;
  for (auto& s : report.pumps)
    s.cycles_completed = cycles_done(program.waves.at(s.pump_id), report.end_time);
  return report;
}

void SerialBackend::stop_all() {
  stop_requested_ = true;
  send(Frame(kBroadcastId, Opcode::Stop));
}

void write_telemetry_header(std::ostream& out) {
  out << "t_s,pump_id,commanded_ml,position_steps,voxel_pa\n";
}

void write_telemetry_row(std::ostream& out, const TelemetryRecord& r) {
  fmt::print(out, "{:.6f},{},{:.6f},{},", r.t, r.pump_id, r.commanded_volume,
             r.position);
  if (r.voxel_pressure) fmt::print(out, "{:.3f}", *r.voxel_pressure);
  out << '\n';
}

}  // namespace spump
