#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spump/frame.hpp"
#include "spump/kinematics.hpp"
#include "spump/plant.hpp"
#include "spump/waveform.hpp"

namespace spump {

struct SourceLocation {
  int line = 0;    // 1-based
  int column = 0;  // 1-based, bytes
  bool operator==(const SourceLocation&) const = default;
};

enum class DiagnosticKind {
  SyntaxError,
  UnknownKey,
  DuplicatePump,
  WaveForUndeclaredPump,
  InvariantViolation,
};

std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
  DiagnosticKind kind;
  SourceLocation where;
  std::string message;

  // "<path>:<line>:<col>: <Kind>: <message>"
  std::string format(std::string_view path) const;
};

struct PumpDecl {
  std::string name;
  PumpConfig config;  // config.pump_id is the declaration index
  SourceLocation where;
};

// Several pumps with independent waveforms sharing one t = 0 epoch.
struct GaitProgram {
  std::vector<PumpDecl> pumps;
  std::map<std::uint8_t, WaveformSpec> waves;
  std::map<std::uint8_t, SourceLocation> wave_locations;
  std::optional<double> run_duration;  // nullopt = until stopped

  const PumpDecl* find_pump(std::string_view name) const;
  const PumpDecl* find_pump(std::uint8_t id) const;
};

struct ParseResult {
  std::optional<GaitProgram> program;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return program.has_value(); }
};

// Never throws; every failure comes back as a positioned diagnostic.
ParseResult parse_gait(std::string_view text);

// Pump-only configuration file: the same `pump NAME { ... }` blocks, waves
// optional.
ParseResult parse_pump_configs(std::string_view text);

struct PlantFile {
  std::map<std::string, PlantConfig> plants;
  std::optional<PlantConfig> fallback;  // `plant default { ... }`
};

struct PlantParseResult {
  std::optional<PlantFile> file;
  std::vector<Diagnostic> diagnostics;
};

// `plant NAME { ambient_pa = .. syringe_gas_ml = .. voxel_rest_ml = ..
//   compliance_ml_per_pa = .. resistance_pa_s_per_ml = .. tube_ml = .. }`
PlantParseResult parse_plants(std::string_view text);

struct PumpFrames {
  std::uint8_t pump_id;
  std::vector<Frame> frames;
};

// Per pump: CONFIGURE, SET_WAVEFORM, HOME; then one broadcast START.
// Throws Error(QuantizationOverflow) naming the pump.
std::vector<PumpFrames> compile_gait(const GaitProgram& program);

// Annotated hex listing of compile_gait output.
std::string dump_frames(const GaitProgram& program,
                        const std::vector<PumpFrames>& frames);

}  // namespace spump
