#pragma once

#include <span>
#include <vector>

#include "acap/curved_merge.hpp"
#include "acap/geometry.hpp"

namespace acap {

struct ToolpathVertex {
  Point position;
  bool extruding = true;
  /// Thickness deposited on the move that ends here; 0 for travel.
  double local_thickness = 0.0;
  /// Layer index inside the owning toolpath, -1 on connectors.
  int layer = -1;
};

struct Toolpath {
  int opp_id = 0;
  std::vector<ToolpathVertex> vertices;

  double extruded_length() const;
};

struct Transfer {
  int from_opp = 0;
  int to_opp = 0;
  /// Raise, travel and descend; the first vertex is the end of the previous toolpath.
  std::vector<ToolpathVertex> moves;

  double length() const;
};

struct PlanStats {
  int opp_count = 0;
  int transfer_count = 0;
  double total_extruded_length = 0.0;
  double transfer_length = 0.0;
  double estimated_time = 0.0;
};

struct PrintPlan {
  std::vector<Toolpath> toolpaths;
  std::vector<Transfer> transfers;
  PlanStats stats;
};

/// One printed layer of a patch. `thickness` has one entry per point.
struct LayerPath {
  Polyline points;
  bool closed = false;
  std::vector<double> thickness;
};

/// Layers of a patch in printing order: flat elements, then curved stack layers.
std::vector<LayerPath> patch_layers(const OppPatch &patch, const SlicedModel &sliced, double flat_thickness);

struct ZigzagChoice {
  /// reversed[i] is true when layer i is entered at its last point.
  std::vector<bool> reversed;
  double cost = 0.0;
};

/// Orientation of each open layer minimising the summed exit-to-entry distances.
ZigzagChoice zigzag_entries(std::span<const Polyline> layers);

/// Vertices after `exit` up to and including `entry`. Far entries get an extra path that
/// runs along the current layer (lifted by t_min) to the point nearest the entry.
std::vector<ToolpathVertex> inter_layer_connection(const Point &exit, const Point &entry,
                                                   std::span<const Point> current_layer, bool closed, double D,
                                                   double t_min);

/// Zig-zag toolpath over open layers.
Toolpath zigzag_connect(std::span<const LayerPath> layers, double D, double t_min);

/// Closed polyline resampled to m points evenly spaced by arc length.
Polyline resample_closed(std::span<const Point> contour, int m);

struct SpiralChoice {
  std::vector<int> start;
  double cost = 0.0;
};

/// Connecting sample per contour minimising the summed distances between consecutive ones.
SpiralChoice spiral_connection_dp(std::span<const Polyline> samples);

/// Spiral through the contours; the top contour is printed as a plain loop.
Toolpath spiralize_contours(std::span<const LayerPath> contours, int m);

struct LowSlopeRegion {
  int lower_layer = 0;
  double max_angle_deg = 0.0;
};

/// Contour pairs whose nearest-sample matching edges are all flatter than the threshold.
std::vector<LowSlopeRegion> detect_low_slope_regions(std::span<const Polyline> contours, int m,
                                                     double threshold_deg = 20.0);

/// Single continuous path for a patch.
Toolpath patch_toolpath(const OppPatch &patch, const SlicedModel &sliced, const PrinterConfig &cfg);

/// Smallest-id-first topological order of the patches.
std::vector<int> order_opps(const CurvedOppGraph &g);

/// Joins ordered toolpaths with raise/travel/descend transfers and fills the statistics.
PrintPlan plan_transfers(std::vector<Toolpath> ordered, double clearance, double speed);

struct SpacingOptions {
  double target = 1.0;
  int iterations = 10;
  StackLimits limits;
  /// Largest total vertical displacement of any vertex.
  double max_displacement = 6.0;
};

/// Mean |spacing - target| over extruding vertices that have a layer below them.
double mean_spacing_error(const PrintPlan &plan, double target);

/// Thickness and slope violations of extruding layer vertices.
std::vector<std::string> audit_plan(const PrintPlan &plan, const StackLimits &limits);

/// Vertical relaxation toward the target spacing plus Laplacian smoothing along each layer.
/// Steps that would raise the error or break the limits are halved and retried.
PrintPlan optimize_spacing(const PrintPlan &plan, const SpacingOptions &opts);

} // namespace acap
