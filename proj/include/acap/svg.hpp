#pragma once

#include <span>
#include <string>

#include "acap/geometry.hpp"
#include "acap/opp_graph.hpp"
#include "acap/toolpath.hpp"

namespace acap {

/// Drawings are side views: x to the right, z up.
struct SvgOptions {
  double scale = 4.0;
  double margin = 10.0;
};

/// Fill colour used for group `id`.
std::string group_color(int id);

/// Elements coloured by group (`group[element id]`, -1 for grey) with dependency arrows
/// between element midpoints. Collision edges are dashed.
std::string svg_elements(const SlicedModel &sliced, std::span<const int> group, const Dag *dep,
                         const SvgOptions &opts = {});

/// Toolpaths coloured by OPP, transfers in red.
std::string svg_plan(const PrintPlan &plan, const SvgOptions &opts = {});

} // namespace acap
