#include "spump/cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "spump/error.hpp"
#include "spump/gait.hpp"
#include "spump/motion.hpp"
#include "spump/orchestrator.hpp"
#include "spump/plot.hpp"
#include "spump/transport.hpp"

namespace spump::cli {

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted = true; }

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

struct Loaded {
  GaitProgram program;
  int status = kOk;
};

// parse_gait plus stroke, feasibility and wire-range checks, each reported
// at the wave's location.
Loaded load_program(const std::string& path, std::ostream& err) {
  Loaded l;
  const auto text = read_file(path);
  if (!text) {
    fmt::print(err, "{}: cannot read file\n", path);
    l.status = kUsageError;
    return l;
  }
  ParseResult parsed = parse_gait(*text);
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics) err << d.format(path) << '\n';
    l.status = kDomainError;
    return l;
  }
  l.program = std::move(*parsed.program);
  const GaitProgram& prog = l.program;
  auto report = [&](std::uint8_t id, std::string_view kind, const std::string& msg) {
    const SourceLocation at = prog.wave_locations.at(id);
    fmt::print(err, "{}:{}:{}: {}: {}\n", path, at.line, at.column, kind, msg);
    l.status = kDomainError;
  };
  for (const auto& p : prog.pumps) {
    const std::uint8_t id = p.config.pump_id;
    const WaveformSpec& wave = prog.waves.at(id);
    const StrokeReport stroke = validate_stroke(p.config, wave);
    if (!stroke.ok())
      report(id, "StrokeExceeded", fmt::format("pump '{}': {}", p.name, stroke.describe()));
    if (wave.shape != Shape::Square) {
      const double need = required_step_rate(p.config, wave);
      if (need > p.config.drive.max_step_rate)
        report(id, "Infeasible",
               fmt::format("pump '{}': waveform requires {:.1f} steps/s, drive "
                           "allows {:.1f} steps/s",
                           p.name, need, p.config.drive.max_step_rate));
    }
  }
  if (l.status == kOk) {
    try {
      compile_gait(prog);
    } catch (const Error& e) {
      // Name the offending pump's wave line when we can.
      std::uint8_t id = prog.pumps.empty() ? 0 : prog.pumps.front().config.pump_id;
      for (const auto& p : prog.pumps)
        if (std::string_view(e.what()).find("'" + p.name + "'") != std::string_view::npos)
          id = p.config.pump_id;
      if (prog.wave_locations.count(id))
        report(id, to_string(e.code()), e.what());
      else {
        fmt::print(err, "{}: {}: {}\n", path, to_string(e.code()), e.what());
        l.status = kDomainError;
      }
    }
  }
  return l;
}

struct RunFlags {
  std::string program;
  std::string plants;
  std::string out = "-";
  double tick = 1e-3;
  double cadence = 0.01;
  std::optional<double> duration;
  std::string port;
  unsigned baud = 115200;
};

int write_output(const std::string& path, const std::string& data,
                 std::ostream& out, std::ostream& err) {
  if (path == "-") {
    out << data;
    return kOk;
  }
  std::ofstream f(path, std::ios::binary);
  f << data;
  if (!f) {
    fmt::print(err, "{}: cannot write file\n", path);
    return kUsageError;
  }
  return kOk;
}

int cmd_validate(const RunFlags& flags, std::ostream&, std::ostream& err) {
  return load_program(flags.program, err).status;
}

int execute(Backend& backend, const GaitProgram& program, const RunFlags& flags,
            std::ostream& out, std::ostream& err) {
  RunOptions opts;
  opts.tick = flags.tick;
  opts.cadence = flags.cadence;
  opts.duration = flags.duration;
  std::ostringstream csv;
  write_telemetry_header(csv);
  ExitReport report;
  try {
    report = backend.run(program, opts,
                         [&csv](const TelemetryRecord& r) { write_telemetry_row(csv, r); });
  } catch (const Error& e) {
    fmt::print(err, "error: {}: {}\n", to_string(e.code()), e.what());
    return e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::Io
               ? kUsageError
               : kDomainError;
  }
  const int status = write_output(flags.out, csv.str(), out, err);
  if (status != kOk) return status;
  (flags.out == "-" ? err : out) << report.render();
  return report.errors.empty() ? kOk : kDomainError;
}

int cmd_simulate(const RunFlags& flags, std::ostream& out, std::ostream& err) {
  const Loaded l = load_program(flags.program, err);
  if (l.status != kOk) return l.status;
  std::optional<PlantFile> plants;
  if (!flags.plants.empty()) {
    const auto text = read_file(flags.plants);
    if (!text) {
      fmt::print(err, "{}: cannot read file\n", flags.plants);
      return kUsageError;
    }
    auto parsed = parse_plants(*text);
    if (!parsed.file) {
      for (const auto& d : parsed.diagnostics) err << d.format(flags.plants) << '\n';
      return kDomainError;
    }
    plants = std::move(parsed.file);
  }
  std::map<std::uint8_t, PlantConfig> assigned;
  try {
    assigned = assign_plants(l.program, plants ? &*plants : nullptr);
  } catch (const Error& e) {
    fmt::print(err, "{}: {}\n", flags.plants, e.what());
    return kDomainError;
  }
  SimBackend backend(std::move(assigned));
  return execute(backend, l.program, flags, out, err);
}

int cmd_run(const RunFlags& flags, std::ostream& out, std::ostream& err) {
  const Loaded l = load_program(flags.program, err);
  if (l.status != kOk) return l.status;
  std::unique_ptr<SerialBackend> backend;
  try {
    backend = std::make_unique<SerialBackend>(
        std::make_unique<PosixSerialPort>(flags.port, flags.baud));
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsageError;
  }
  g_interrupted = false;
  auto previous = std::signal(SIGINT, on_sigint);
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done) {
      if (g_interrupted.exchange(false)) {
        try {
          backend->stop_all();
        } catch (const Error& e) {
          fmt::print(err, "error: {}\n", e.what());
        }
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  });
  const int status = execute(*backend, l.program, flags, out, err);
  done = true;
  watcher.join();
  std::signal(SIGINT, previous);
  return status;
}

int cmd_frames(const RunFlags& flags, std::ostream& out, std::ostream& err) {
  const Loaded l = load_program(flags.program, err);
  if (l.status != kOk) return l.status;
  const std::string dump = dump_frames(l.program, compile_gait(l.program));
  return write_output(flags.out, dump, out, err);
}

int cmd_plot(const std::string& csv_path, const std::string& out_path,
             std::ostream& out, std::ostream& err) {
  const auto text = read_file(csv_path);
  if (!text) {
    fmt::print(err, "{}: cannot read file\n", csv_path);
    return kUsageError;
  }
  std::vector<TelemetryRecord> records;
  try {
    records = read_telemetry_csv(*text);
  } catch (const CsvError& e) {
    fmt::print(err, "{}:{}:{}: CsvError: {}\n", csv_path, e.line(), e.column(), e.what());
    return kDomainError;
  }
  return write_output(out_path, render_plot_svg(records), out, err);
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"Syringe pump gait planner, simulator and host controller", "spump"};
  app.require_subcommand(1, 1);

  RunFlags flags;
  std::string plot_csv;
  std::string plot_out = "-";

  auto add_common = [&flags](CLI::App* sub) {
    sub->add_option("program", flags.program, "Gait program file")->required();
    sub->add_option("--tick", flags.tick, "Planning tick in seconds")
        ->check(CLI::PositiveNumber);
    sub->add_option("--cadence", flags.cadence, "Telemetry interval in seconds")
        ->check(CLI::PositiveNumber);
    sub->add_option("--duration", flags.duration, "Override the run duration (s)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", flags.out, "Output path ('-' for stdout)");
  };

  auto* validate = app.add_subcommand("validate", "Check a gait program");
  validate->add_option("program", flags.program, "Gait program file")->required();

  auto* simulate = app.add_subcommand("simulate", "Simulate pumps and voxels");
  add_common(simulate);
  simulate->add_option("--plants", flags.plants, "Plant configuration file");

  auto* run = app.add_subcommand("run", "Drive real pumps over a serial port");
  add_common(run);
  run->add_option("--port", flags.port, "Serial device")->required();
  run->add_option("--baud", flags.baud, "Baud rate");

  auto* frames = app.add_subcommand("frames", "Dump compiled wire frames");
  frames->add_option("program", flags.program, "Gait program file")->required();
  frames->add_option("--out", flags.out, "Output path ('-' for stdout)");

  auto* plot = app.add_subcommand("plot", "Render telemetry CSV as SVG");
  plot->add_option("csv", plot_csv, "Telemetry CSV")->required();
  plot->add_option("--out", plot_out, "Output SVG path ('-' for stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsageError;
  }

  if (*validate) return cmd_validate(flags, out, err);
  if (*simulate) return cmd_simulate(flags, out, err);
  if (*run) return cmd_run(flags, out, err);
  if (*frames) return cmd_frames(flags, out, err);
  if (*plot) return cmd_plot(plot_csv, plot_out, out, err);
  return kUsageError;
}

}  // namespace spump::cli
