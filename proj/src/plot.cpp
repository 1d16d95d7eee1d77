#include "spump/plot.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include <fmt/format.h>

namespace spump {

namespace {

constexpr std::string_view kHeader =
    "t_s,pump_id,commanded_ml,position_steps,voxel_pa";

constexpr double kWidth = 800;
constexpr double kPanelHeight = 240;
constexpr double kLeft = 70;
constexpr double kRight = 740;
constexpr double kTop = 30;     // within a panel
constexpr double kBottom = 200; // within a panel

template <typename T>
bool parse_field(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

struct Range {
  double lo = 0;
  double hi = 0;
  void pad() {
    if (hi - lo <= 0) {
      lo -= 1;
      hi += 1;
    }
  }
};

std::string polyline(const std::vector<std::pair<double, double>>& pts,
                     const char* cls, const char* colour) {
  std::string s = fmt::format(R"(<polyline class="{}" fill="none" stroke="{}" stroke-width="1.5" points=")",
                              cls, colour);
  for (std::size_t i = 0; i < pts.size(); ++i)
    s += fmt::format("{}{:.3f},{:.3f}", i ? " " : "", pts[i].first, pts[i].second);
  s += "\"/>\n";
  return s;
}

}  // namespace

std::vector<TelemetryRecord> read_telemetry_csv(std::string_view text) {
  std::vector<TelemetryRecord> out;
  int line_no = 0;
  std::size_t pos = 0;
  bool header = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header) {
      if (line != kHeader) {
        std::size_t col = 0;
        while (col < line.size() && col < kHeader.size() && line[col] == kHeader[col]) ++col;
        throw CsvError(line_no, static_cast<int>(col) + 1,
                       fmt::format("expected header '{}'", kHeader));
      }
      header = true;
      continue;
    }
    if (line.empty()) continue;

    std::vector<std::pair<std::string_view, int>> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::size_t end = comma == std::string_view::npos ? line.size() : comma;
      fields.emplace_back(line.substr(start, end - start), static_cast<int>(start) + 1);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 5)
      throw CsvError(line_no, 1,
                     fmt::format("expected 5 fields, found {}", fields.size()));
    TelemetryRecord r;
    unsigned id = 0;
    auto bad = [&](std::size_t i, const char* what) {
      return CsvError(line_no, fields[i].second,
                      fmt::format("invalid {} '{}'", what, fields[i].first));
    };
    if (!parse_field(fields[0].first, r.t)) throw bad(0, "t_s");
    if (!parse_field(fields[1].first, id) || id > 255) throw bad(1, "pump_id");
    r.pump_id = static_cast<std::uint8_t>(id);
    if (!parse_field(fields[2].first, r.commanded_volume)) throw bad(2, "commanded_ml");
    if (!parse_field(fields[3].first, r.position)) throw bad(3, "position_steps");
    if (!fields[4].first.empty()) {
      double p = 0;
      if (!parse_field(fields[4].first, p)) throw bad(4, "voxel_pa");
      r.voxel_pressure = p;
    }
    out.push_back(r);
  }
  if (!header) throw CsvError(1, 1, fmt::format("missing header '{}'", kHeader));
  if (out.empty())
    throw CsvError(line_no + 1, 1, "no data rows after the header");
  return out;
}

std::string render_plot_svg(const std::vector<TelemetryRecord>& records) {
  std::map<std::uint8_t, std::vector<const TelemetryRecord*>> by_pump;
  for (const auto& r : records) by_pump[r.pump_id].push_back(&r);

  const double height = kPanelHeight * static_cast<double>(by_pump.size());
  std::string svg = fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="{:.0f}" height="{:.0f}" viewBox="0 0 {:.0f} {:.0f}">)"
      "\n",
      kWidth, height, kWidth, height);
  svg += R"(<rect width="100%" height="100%" fill="white"/>)" "\n";

  double y_off = 0;
  for (const auto& [id, rows] : by_pump) {
    Range t{rows.front()->t, rows.front()->t};
    Range v{rows.front()->commanded_volume, rows.front()->commanded_volume};
    std::optional<Range> p;
    for (const auto* r : rows) {
      t.lo = std::min(t.lo, r->t);
      t.hi = std::max(t.hi, r->t);
      v.lo = std::min(v.lo, r->commanded_volume);
      v.hi = std::max(v.hi, r->commanded_volume);
      if (r->voxel_pressure) {
        if (!p) p = Range{*r->voxel_pressure, *r->voxel_pressure};
        p->lo = std::min(p->lo, *r->voxel_pressure);
        p->hi = std::max(p->hi, *r->voxel_pressure);
      }
    }
    t.pad();
    v.pad();
    if (p) p->pad();

    const double y0 = y_off + kBottom;
    const double y1 = y_off + kTop;
    auto x_of = [&](double tt) { return kLeft + (tt - t.lo) / (t.hi - t.lo) * (kRight - kLeft); };
    auto y_of = [&](double val, const Range& r) {
      return y0 + (val - r.lo) / (r.hi - r.lo) * (y1 - y0);
    };

    svg += fmt::format(
        R"(<g class="panel" data-pump="{}" data-t0="{:.6f}" data-t1="{:.6f}" data-x0="{:.1f}" data-x1="{:.1f}" data-v0="{:.6f}" data-v1="{:.6f}" data-y0="{:.1f}" data-y1="{:.1f}">)"
        "\n",
        id, t.lo, t.hi, kLeft, kRight, v.lo, v.hi, y0, y1);
    svg += fmt::format(
        R"(<rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}" fill="none" stroke="#888"/>)"
        "\n",
        kLeft, y1, kRight - kLeft, y0 - y1);
    svg += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="13">pump {}</text>)" "\n",
                       kLeft, y_off + 20, id);
    svg += fmt::format(R"(<text x="4" y="{:.1f}" font-size="10" fill="#1f4e9c">{:.3f} mL</text>)" "\n",
                       y1 + 10, v.hi);
    svg += fmt::format(R"(<text x="4" y="{:.1f}" font-size="10" fill="#1f4e9c">{:.3f} mL</text>)" "\n",
                       y0, v.lo);
    svg += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="10">{:.3f} s</text>)" "\n",
                       kLeft, y0 + 14, t.lo);
    svg += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="10" text-anchor="end">{:.3f} s</text>)" "\n",
                       kRight, y0 + 14, t.hi);

    std::vector<std::pair<double, double>> vol;
    for (const auto* r : rows) vol.emplace_back(x_of(r->t), y_of(r->commanded_volume, v));
    svg += polyline(vol, "commanded", "#1f4e9c");
    if (p) {
      std::vector<std::pair<double, double>> pres;
      for (const auto* r : rows)
        if (r->voxel_pressure) pres.emplace_back(x_of(r->t), y_of(*r->voxel_pressure, *p));
      svg += polyline(pres, "pressure", "#c0392b");
      svg += fmt::format(
          R"(<text x="{:.1f}" y="{:.1f}" font-size="10" fill="#c0392b">{:.0f} Pa</text>)" "\n",
          kRight + 4, y1 + 10, p->hi);
      svg += fmt::format(
          R"(<text x="{:.1f}" y="{:.1f}" font-size="10" fill="#c0392b">{:.0f} Pa</text>)" "\n",
          kRight + 4, y0, p->lo);
    }
    svg += "</g>\n";
    y_off += kPanelHeight;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace spump
