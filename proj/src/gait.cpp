#include "spump/gait.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <fmt/format.h>

#include "dsl_lexer.hpp"
#include "spump/error.hpp"
#include "spump/payload.hpp"

namespace spump {

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::SyntaxError: return "SyntaxError";
    case DiagnosticKind::UnknownKey: return "UnknownKey";
    case DiagnosticKind::DuplicatePump: return "DuplicatePump";
    case DiagnosticKind::WaveForUndeclaredPump: return "WaveForUndeclaredPump";
    case DiagnosticKind::InvariantViolation: return "InvariantViolation";
  }
  return "?";
}

std::string Diagnostic::format(std::string_view path) const {
  return fmt::format("{}:{}:{}: {}: {}", path, where.line, where.column,
                     to_string(kind), message);
}

const PumpDecl* GaitProgram::find_pump(std::string_view name) const {
  for (const auto& p : pumps)
    if (p.name == name) return &p;
  return nullptr;
}

const PumpDecl* GaitProgram::find_pump(std::uint8_t id) const {
  for (const auto& p : pumps)
    if (p.config.pump_id == id) return &p;
  return nullptr;
}

namespace {

using dsl::Lexer;
using dsl::Tok;
using dsl::Token;

struct Entry {
  Token key;
  Token value;
};

struct Block {
  Token keyword;
  Token name;
  std::vector<Entry> entries;
};

// A key's admissible values; returns the violated condition or empty.
using Rule = std::function<std::string(double)>;

struct KeySpec {
  std::string_view name;
  bool required;
  double fallback;
  Rule rule;
};

Rule positive(std::string_view key) {
  return [key](double v) {
    return v > 0 && std::isfinite(v) ? std::string()
                                     : fmt::format("{} > 0", key);
  };
}

Rule non_negative(std::string_view key) {
  return [key](double v) {
    return v >= 0 && std::isfinite(v) ? std::string()
                                      : fmt::format("{} >= 0", key);
  };
}

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

Rule positive_integer(std::string_view key, double max) {
  return [key, max](double v) {
    return is_integer(v) && v >= 1 && v <= max
               ? std::string()
               : fmt::format("{} is an integer in [1, {}]", key, max);
  };
}

const std::vector<KeySpec>& pump_keys() {
  static const std::vector<KeySpec> keys = {
      {"bore_mm", true, 0, positive("bore_mm")},
      {"max_travel_mm", true, 0, positive("max_travel_mm")},
      {"dead_volume_ml", false, 0, non_negative("dead_volume_ml")},
      {"pitch_mm", true, 0, positive("pitch_mm")},
      {"steps_per_rev", true, 0, positive_integer("steps_per_rev", 65535)},
      {"microsteps", true, 0,
       [](double v) {
         return v == 1 || v == 2 || v == 4 || v == 8 || v == 16 || v == 32
                    ? std::string()
                    : std::string("microsteps in {1,2,4,8,16,32}");
       }},
      {"max_step_rate", true, 0, positive("max_step_rate")},
      {"max_accel", true, 0, positive("max_accel")},
      {"soft_limit_mm", false, 0, non_negative("soft_limit_mm")},
      {"invert", false, 0,
       [](double v) {
         return v == 0 || v == 1 ? std::string() : std::string("invert in {0,1}");
       }},
  };
  return keys;
}

const std::vector<KeySpec>& wave_keys() {
  static const std::vector<KeySpec> keys = {
      {"period", true, 0, positive("period")},
      {"amplitude_ml", true, 0, non_negative("amplitude_ml")},
      {"duty", false, 0.5,
       [](double v) { return v > 0 && v < 1 ? "" : std::string("0 < duty < 1"); }},
      {"phase", false, 0,
       [](double v) { return v >= 0 && v < 1 ? "" : std::string("0 <= phase < 1"); }},
      {"offset_ml", false, 0, non_negative("offset_ml")},
      {"ramp", false, -1,
       [](double v) { return v > 0 && v < 1 ? "" : std::string("0 < ramp < 1"); }},
      {"cycles", false, 0, positive_integer("cycles", 4294967295.0)},
  };
  return keys;
}

const std::vector<KeySpec>& plant_keys() {
  static const std::vector<KeySpec> keys = {
      {"ambient_pa", false, 101325.0, positive("ambient_pa")},
      {"syringe_gas_ml", true, 0, positive("syringe_gas_ml")},
      {"voxel_rest_ml", true, 0, positive("voxel_rest_ml")},
      {"compliance_ml_per_pa", false, 0, non_negative("compliance_ml_per_pa")},
      {"resistance_pa_s_per_ml", false, 0, non_negative("resistance_pa_s_per_ml")},
      {"tube_ml", false, 0, non_negative("tube_ml")},
  };
  return keys;
}

// Resolved key values, with the token each came from for diagnostics.
struct Values {
  std::map<std::string_view, double> value;
  std::map<std::string_view, SourceLocation> where;

  double operator[](std::string_view k) const { return value.at(k); }
  bool given(std::string_view k) const { return where.count(k) != 0; }
};

enum class Mode { Gait, PumpConfigs, Plants };

class Parser {
 public:
  Parser(std::string_view text, Mode mode) : lex_(text), mode_(mode) {}

  void run() {
    while (true) {
      const Token& t = lex_.peek();
      if (t.kind == Tok::End) break;
      if (t.kind == Tok::Newline) {
        lex_.take();
        continue;
      }
      statement();
    }
    finish();
  }

  std::vector<Diagnostic> diagnostics;
  GaitProgram program;
  PlantFile plants;

 private:
  void error(DiagnosticKind kind, SourceLocation at, std::string msg) {
    diagnostics.push_back({kind, at, std::move(msg)});
  }

  void syntax(const Token& t, std::string_view expected) {
    error(DiagnosticKind::SyntaxError, t.where,
          fmt::format("expected {}, found {}", expected, dsl::describe(t)));
  }

  void skip_line() {
    while (lex_.peek().kind != Tok::Newline && lex_.peek().kind != Tok::End)
      lex_.take();
  }

  void skip_block() {
    while (lex_.peek().kind != Tok::RBrace && lex_.peek().kind != Tok::End)
      lex_.take();
    if (lex_.peek().kind == Tok::RBrace) lex_.take();
    skip_line();
  }

  bool end_of_statement() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Newline || t.kind == Tok::End) return true;
    syntax(t, "end of line");
    skip_line();
    return false;
  }

  void statement() {
    const Token kw = lex_.take();
    const bool gait = mode_ != Mode::Plants;
    if (kw.kind == Tok::Ident && gait && kw.text == "pump") return pump(kw);
    if (kw.kind == Tok::Ident && gait && kw.text == "wave") return wave(kw);
    if (kw.kind == Tok::Ident && gait && kw.text == "run") return run(kw);
    if (kw.kind == Tok::Ident && !gait && kw.text == "plant") return plant(kw);
    syntax(kw, gait ? "'pump', 'wave' or 'run'" : "'plant'");
    skip_line();
  }

  std::optional<Block> block(const Token& kw) {
    Block b;
    b.keyword = kw;
    if (lex_.peek().kind != Tok::Ident) {
      syntax(lex_.peek(), "a name");
      skip_line();
      return std::nullopt;
    }
    b.name = lex_.take();
    if (lex_.peek().kind != Tok::LBrace) {
      syntax(lex_.peek(), "'{'");
      skip_line();
      return std::nullopt;
    }
    lex_.take();
    while (true) {
      while (lex_.peek().kind == Tok::Newline) lex_.take();
      const Token t = lex_.take();
      if (t.kind == Tok::RBrace) break;
      if (t.kind == Tok::End) {
        error(DiagnosticKind::SyntaxError, kw.where,
              fmt::format("unterminated block '{}': missing '}}'", b.name.text));
        return std::nullopt;
      }
      if (t.kind != Tok::Ident) {
        syntax(t, "a key or '}'");
        skip_block();
        return std::nullopt;
      }
      if (lex_.peek().kind != Tok::Equals) {
        syntax(lex_.peek(), "'='");
        skip_block();
        return std::nullopt;
      }
      lex_.take();
      if (lex_.peek().kind != Tok::Number) {
        syntax(lex_.peek(), "a number");
        skip_block();
        return std::nullopt;
      }
      b.entries.push_back({t, lex_.take()});
    }
    if (!end_of_statement()) return std::nullopt;
    return b;
  }

  // Applies key specs: unknown/duplicate/missing keys and per-key ranges.
  std::optional<Values> resolve(const std::vector<Entry>& entries,
                                const std::vector<KeySpec>& specs,
                                const Token& owner) {
    Values v;
    bool ok = true;
    bool unknown = false;
    for (const auto& e : entries) {
      const auto spec = std::find_if(specs.begin(), specs.end(),
                                     [&](const KeySpec& s) { return s.name == e.key.text; });
      if (spec == specs.end()) {
        std::string known;
        for (const auto& s : specs)
          known += (known.empty() ? "" : ", ") + std::string(s.name);
        error(DiagnosticKind::UnknownKey, e.key.where,
              fmt::format("unknown key '{}' (expected one of: {})", e.key.text,
                          known));
        ok = false;
        unknown = true;
        continue;
      }
      if (v.given(spec->name)) {
        error(DiagnosticKind::SyntaxError, e.key.where,
              fmt::format("duplicate key '{}'", e.key.text));
        ok = false;
        continue;
      }
      if (const std::string bad = spec->rule(e.value.number); !bad.empty()) {
        error(DiagnosticKind::InvariantViolation, e.value.where,
              fmt::format("{} = {} violates {}", e.key.text, e.value.text, bad));
        ok = false;
      }
      v.value[spec->name] = e.value.number;
      v.where[spec->name] = e.key.where;
    }
    for (const auto& s : specs) {
      if (v.given(s.name)) continue;
      // A misspelt key already explains the missing one.
      if (s.required && !unknown) {
        error(DiagnosticKind::SyntaxError, owner.where,
              fmt::format("'{}' is missing required key '{}'", owner.text, s.name));
      }
      if (s.required) ok = false;
      v.value[s.name] = s.fallback;
    }
    if (!ok) return std::nullopt;
    return v;
  }

  void pump(const Token& kw) {
    auto b = block(kw);
    if (!b) {
      broken_pump_ = true;
      return;
    }
    if (program.find_pump(b->name.text)) {
      error(DiagnosticKind::DuplicatePump, b->name.where,
            fmt::format("pump '{}' is already declared", b->name.text));
      return;
    }
    const auto v = resolve(b->entries, pump_keys(), b->name);
    if (!v) {
      failed_pumps_.insert(std::string(b->name.text));
      return;
    }
    if (program.pumps.size() >= 255) {
      error(DiagnosticKind::InvariantViolation, b->name.where,
            "at most 255 pumps (ids 0-254) per program");
      return;
    }
    PumpDecl d;
    d.name = std::string(b->name.text);
    d.where = kw.where;
    PumpConfig& c = d.config;
    c.pump_id = static_cast<std::uint8_t>(program.pumps.size());
    c.syringe.bore_diameter = (*v)["bore_mm"];
    c.syringe.max_travel = (*v)["max_travel_mm"];
    c.syringe.dead_volume = (*v)["dead_volume_ml"];
    c.drive.lead_screw_pitch = (*v)["pitch_mm"];
    c.drive.full_steps_per_rev = static_cast<std::uint32_t>((*v)["steps_per_rev"]);
    c.drive.microstep_factor = static_cast<std::uint32_t>((*v)["microsteps"]);
    c.drive.max_step_rate = (*v)["max_step_rate"];
    c.drive.max_accel = (*v)["max_accel"];
    c.drive.invert_direction = (*v)["invert"] == 1;
    c.soft_limit_margin = (*v)["soft_limit_mm"];
    if (!(c.soft_limit_margin < c.syringe.max_travel / 2)) {
      const auto at = v->given("soft_limit_mm") ? v->where.at("soft_limit_mm")
                                                : b->name.where;
      error(DiagnosticKind::InvariantViolation, at,
            fmt::format("soft_limit_mm = {} violates soft_limit_mm < "
                        "max_travel_mm / 2 = {}",
                        c.soft_limit_margin, c.syringe.max_travel / 2));
      failed_pumps_.insert(d.name);
      return;
    }
    program.pumps.push_back(std::move(d));
  }

  void wave(const Token& kw) {
    if (lex_.peek().kind != Tok::Ident) {
      syntax(lex_.peek(), "a pump name");
      broken_wave_ = true;
      return skip_line();
    }
    const Token name = lex_.take();
    // Marked failed until the wave is accepted below.
    failed_waves_.insert(std::string(name.text));
    const Token shape_tok = lex_.take();
    const auto shape = shape_tok.kind == Tok::Ident
                           ? shape_from_string(shape_tok.text)
                           : std::nullopt;
    if (!shape) {
      syntax(shape_tok, "a shape ('sine', 'trapezoid' or 'square')");
      return skip_line();
    }
    std::vector<Entry> entries;
    while (lex_.peek().kind != Tok::Newline && lex_.peek().kind != Tok::End) {
      const Token key = lex_.take();
      if (key.kind != Tok::Ident) {
        syntax(key, "key=value");
        return skip_line();
      }
      if (lex_.peek().kind != Tok::Equals) {
        syntax(lex_.peek(), "'='");
        return skip_line();
      }
      lex_.take();
      if (lex_.peek().kind != Tok::Number) {
        syntax(lex_.peek(), "a number");
        return skip_line();
      }
      entries.push_back({key, lex_.take()});
    }
    const auto v = resolve(entries, wave_keys(), kw);
    if (!v) return;

    WaveformSpec w;
    w.shape = *shape;
    w.period = (*v)["period"];
    w.amplitude = (*v)["amplitude_ml"];
    w.duty = (*v)["duty"];
    w.phase = (*v)["phase"];
    w.offset = (*v)["offset_ml"];
    w.ramp = v->given("ramp") ? (*v)["ramp"] : default_ramp(w.duty);
    if (v->given("cycles"))
      w.cycles = static_cast<std::uint32_t>((*v)["cycles"]);
    if (w.shape == Shape::Trapezoid &&
        !(w.ramp > 0 && w.ramp <= std::min(w.duty, 1.0 - w.duty))) {
      const auto at = v->given("ramp") ? v->where.at("ramp") : kw.where;
      error(DiagnosticKind::InvariantViolation, at,
            fmt::format("ramp = {} violates 0 < ramp <= min(duty, 1 - duty) = {}",
                        w.ramp, std::min(w.duty, 1.0 - w.duty)));
      return;
    }
    failed_waves_.erase(std::string(name.text));
    pending_waves_.push_back({std::string(name.text), name.where, kw.where, w});
  }

  void run(const Token& kw) {
    const Token t = lex_.take();
    std::optional<double> duration;
    if (t.kind == Tok::Ident && t.text == "forever") {
    } else if (t.kind == Tok::Number) {
      const Token unit = lex_.take();
      if (unit.kind != Tok::Ident || unit.text != "s") {
        syntax(unit, "'s' after the run duration");
        return skip_line();
      }
      if (!(t.number >= 0) || !std::isfinite(t.number)) {
        error(DiagnosticKind::InvariantViolation, t.where,
              fmt::format("run duration {} violates duration >= 0", t.text));
        return skip_line();
      }
      duration = t.number;
    } else {
      syntax(t, "a duration ('<seconds> s') or 'forever'");
      return skip_line();
    }
    if (!end_of_statement()) return;
    if (run_seen_) {
      error(DiagnosticKind::SyntaxError, kw.where, "duplicate 'run' line");
      return;
    }
    run_seen_ = true;
    program.run_duration = duration;
  }

  void plant(const Token& kw) {
    auto b = block(kw);
    if (!b) return;
    const std::string name(b->name.text);
    if (plants.plants.count(name) || (name == "default" && plants.fallback)) {
      error(DiagnosticKind::SyntaxError, b->name.where,
            fmt::format("plant '{}' is already declared", name));
      return;
    }
    const auto v = resolve(b->entries, plant_keys(), b->name);
    if (!v) return;
    PlantConfig c;
    c.ambient_pressure = (*v)["ambient_pa"];
    c.syringe_initial_gas_volume = (*v)["syringe_gas_ml"];
    c.voxel_rest_volume = (*v)["voxel_rest_ml"];
    c.voxel_compliance = (*v)["compliance_ml_per_pa"];
    c.tube_resistance = (*v)["resistance_pa_s_per_ml"];
    c.tube_volume = (*v)["tube_ml"];
    if (name == "default")
      plants.fallback = c;
    else
      plants.plants.emplace(name, c);
  }

  void finish() {
    std::set<std::uint8_t> seen;
    for (const auto& w : pending_waves_) {
      const PumpDecl* p = program.find_pump(w.pump);
      if (!p && (broken_pump_ || failed_pumps_.count(w.pump))) continue;
      if (!p) {
        error(DiagnosticKind::WaveForUndeclaredPump, w.name_at,
              fmt::format("wave references undeclared pump '{}'", w.pump));
        continue;
      }
      const std::uint8_t id = p->config.pump_id;
      if (!seen.insert(id).second) {
        error(DiagnosticKind::SyntaxError, w.at,
              fmt::format("second wave for pump '{}'", w.pump));
        continue;
      }
      program.waves[id] = w.spec;
      program.wave_locations[id] = w.at;
    }
    if (mode_ == Mode::Gait) {
      for (const auto& p : program.pumps)
        if (!program.waves.count(p.config.pump_id) && !broken_wave_ &&
            !failed_waves_.count(p.name))
          error(DiagnosticKind::InvariantViolation, p.where,
                fmt::format("pump '{}' has no wave", p.name));
    }
    std::stable_sort(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                       return std::pair(a.where.line, a.where.column) <
                              std::pair(b.where.line, b.where.column);
                     });
  }

  struct PendingWave {
    std::string pump;
    SourceLocation name_at;
    SourceLocation at;
    WaveformSpec spec;
  };

  Lexer lex_;
  Mode mode_;
  bool run_seen_ = false;
  std::vector<PendingWave> pending_waves_;
  // Declarations that failed, so their knock-on errors are not reported.
  std::set<std::string> failed_pumps_;
  std::set<std::string> failed_waves_;
  bool broken_pump_ = false;
  bool broken_wave_ = false;
};

ParseResult parse_program(std::string_view text, Mode mode) {
  Parser parser(text, mode);
  parser.run();
  ParseResult r;
  r.diagnostics = std::move(parser.diagnostics);
  if (r.diagnostics.empty()) r.program = std::move(parser.program);
  return r;
}

}  // namespace

ParseResult parse_gait(std::string_view text) {
  return parse_program(text, Mode::Gait);
}

ParseResult parse_pump_configs(std::string_view text) {
  return parse_program(text, Mode::PumpConfigs);
}

PlantParseResult parse_plants(std::string_view text) {
  Parser parser(text, Mode::Plants);
  parser.run();
  PlantParseResult r;
  r.diagnostics = std::move(parser.diagnostics);
  if (r.diagnostics.empty()) r.file = std::move(parser.plants);
  return r;
}

std::vector<PumpFrames> compile_gait(const GaitProgram& program) {
  std::vector<PumpFrames> out;
  for (const auto& p : program.pumps) {
    const std::uint8_t id = p.config.pump_id;
    const auto wave = program.waves.find(id);
    if (wave == program.waves.end())
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("pump '{}' has no wave", p.name));
    PumpFrames pf{id, {}};
    try {
      pf.frames.emplace_back(id, Opcode::Configure, encode_configure(p.config));
      pf.frames.emplace_back(id, Opcode::SetWaveform,
                             encode_waveform(wave->second));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("pump '{}': {}", p.name, e.what()));
    }
    pf.frames.emplace_back(id, Opcode::Home);
    out.push_back(std::move(pf));
  }
  out.push_back(
      {kBroadcastId, {Frame(kBroadcastId, Opcode::Start,
                            encode_start(program.run_duration))}});
  return out;
}

std::string dump_frames(const GaitProgram& program,
                        const std::vector<PumpFrames>& frames) {
  std::string out;
  std::size_t index = 0;
  for (const auto& pf : frames) {
    const PumpDecl* decl = program.find_pump(pf.pump_id);
    const std::string who =
        pf.pump_id == kBroadcastId ? "broadcast" : (decl ? decl->name : "?");
    for (const auto& f : pf.frames) {
      const auto wire = encode_frame(f);
      out += fmt::format("frame {} pump=0x{:02X} ({}) op={}(0x{:02X}) len={} "
                         "crc=0x{:04X}\n",
                         index++, f.pump_id(), who, to_string(f.opcode()),
                         static_cast<unsigned>(f.opcode()), f.payload().size(),
                         f.crc());
      out += "  wire:   " + hex_bytes(wire) + "\n";
      out += "  fields: " + annotate_payload(f) + "\n";
    }
  }
  return out;
}

}  // namespace spump
