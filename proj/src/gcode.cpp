#include "acap/gcode.hpp"

#include <sstream>

#include <fmt/format.h>

namespace acap {

std::string GcodeDocument::str() const {
  std::string out;
  for (const auto *part : {&header, &commands, &footer})
    for (const auto &line : *part) {
      out += line;
      out += '\n';
    }
  return out;
}

namespace {

double extrusion_for(const Point &a, const ToolpathVertex &b, const PrinterConfig &cfg) {
  return cfg.extrusion_coefficient * distance(a, b.position) * cfg.path_width * b.local_thickness;
}

std::string move(const char *code, const Point &p) {
  return fmt::format("{} X{:.6f} Y{:.6f} Z{:.6f}", code, p.x, p.y, p.z);
}

} // namespace

double planned_extrusion(const PrintPlan &plan, const PrinterConfig &cfg) {
  double e = 0.0;
  for (const auto &tp : plan.toolpaths)
    for (std::size_t i = 1; i < tp.vertices.size(); ++i)
      if (tp.vertices[i].extruding)
        e += extrusion_for(tp.vertices[i - 1].position, tp.vertices[i], cfg);
  return e;
}

GcodeDocument emit_gcode(const PrintPlan &plan, const PrinterConfig &cfg, const std::string &model_name) {
  GcodeDocument doc;
  doc.header = {
      fmt::format("; acap {} preset={}", model_name.empty() ? "plan" : model_name, cfg.name),
      fmt::format("; opps={} transfers={}", plan.stats.opp_count, plan.stats.transfer_count),
      "G21 ; mm",
      "G90 ; absolute positioning",
      "M82 ; absolute extrusion",
      "G92 E0",
      fmt::format("G1 F{:.1f}", cfg.speed * 60.0),
  };
  double e = 0.0;
  for (std::size_t t = 0; t < plan.toolpaths.size(); ++t) {
    const auto &tp = plan.toolpaths[t];
    if (t > 0 && t - 1 < plan.transfers.size()) {
      const auto &tr = plan.transfers[t - 1];
      doc.commands.push_back(fmt::format("; transfer {} -> {}", tr.from_opp, tr.to_opp));
      for (std::size_t i = 1; i < tr.moves.size(); ++i)
        doc.commands.push_back(move("G0", tr.moves[i].position));
    }
    doc.commands.push_back(fmt::format("; opp {}", tp.opp_id));
    if (tp.vertices.empty())
      continue;
    doc.commands.push_back(move("G0", tp.vertices[0].position));
    for (std::size_t i = 1; i < tp.vertices.size(); ++i) {
      const auto &v = tp.vertices[i];
      if (!v.extruding) {
        doc.commands.push_back(move("G0", v.position));
        continue;
      }
      e += extrusion_for(tp.vertices[i - 1].position, v, cfg);
      doc.commands.push_back(fmt::format("{} E{:.6f}", move("G1", v.position), e));
    }
  }
  doc.footer = {"; end", "M84"};
  return doc;
}

ParsedGcode parse_gcode(const std::string &text) {
  ParsedGcode out;
  std::istringstream in(text);
  std::string line;
  Point pos;
  double e = 0.0;
  bool have_pos = false;
  while (std::getline(in, line)) {
    if (const auto c = line.find(';'); c != std::string::npos)
      line.erase(c);
    std::istringstream words(line);
    std::string code;
    if (!(words >> code))
      continue;
    if (code != "G0" && code != "G1" && code != "G92")
      continue;
    Point next = pos;
    double next_e = e;
    bool has_e = false, has_xyz = false;
    std::string w;
    while (words >> w) {
      const double v = std::stod(w.substr(1));
      switch (w[0]) {
      case 'X': next.x = v; has_xyz = true; break;
      case 'Y': next.y = v; has_xyz = true; break;
      case 'Z': next.z = v; has_xyz = true; break;
      case 'E': next_e = v; has_e = true; break;
      default: break;
      }
    }
    if (code == "G92") {
      if (has_e)
        e = next_e;
      continue;
    }
    if (!has_xyz && !has_e)
      continue;
    const bool extruding = has_e && next_e > e;
    if (has_e && next_e < e)
      ++out.retractions;
    if (extruding) {
      out.total_extrusion += next_e - e;
      if (have_pos)
        out.extruded_length += distance(pos, next);
    }
    pos = next;
    e = next_e;
    have_pos = have_pos || has_xyz;
    out.moves.push_back({pos, extruding, e});
  }
  return out;
}

} // namespace acap
