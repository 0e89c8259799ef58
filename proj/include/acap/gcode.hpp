#pragma once

#include <string>
#include <vector>

#include "acap/geometry.hpp"
#include "acap/toolpath.hpp"

namespace acap {

struct GcodeDocument {
  std::vector<std::string> header;
  std::vector<std::string> commands;
  std::vector<std::string> footer;

  std::string str() const;
};

/// Extrusion parameter a plan should consume: k * length * path_width * thickness summed
/// over extruding moves.
double planned_extrusion(const PrintPlan &plan, const PrinterConfig &cfg);

/// Absolute XYZ and E. Each toolpath starts with a travel to its first vertex; transfers
/// are travel moves.
GcodeDocument emit_gcode(const PrintPlan &plan, const PrinterConfig &cfg, const std::string &model_name = {});

struct GcodeMove {
  Point position;
  bool extruding = false;
  /// E value after the move.
  double e = 0.0;
};

struct ParsedGcode {
  std::vector<GcodeMove> moves;
  double total_extrusion = 0.0;
  double extruded_length = 0.0;
  /// Moves that lowered E while not following a G92 reset.
  int retractions = 0;
};

/// Reads G0/G1/G92 in absolute mode. Comments and other commands are skipped.
ParsedGcode parse_gcode(const std::string &text);

} // namespace acap
