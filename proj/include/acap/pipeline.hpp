#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acap/curved_merge.hpp"
#include "acap/flat_merge.hpp"
#include "acap/geometry.hpp"
#include "acap/opp_graph.hpp"
#include "acap/toolpath.hpp"

namespace acap {

/// Raised when the model cannot be printed in its orientation; carries the support analysis.
class InfeasibleOrientation : public UnprintableOrientation {
public:
  InfeasibleOrientation(const std::string &what, SupportReport support)
      : UnprintableOrientation(what), support(std::move(support)) {}
  SupportReport support;
};

struct PipelineOptions {
  /// Curved merging; always off for meshes.
  bool curving = true;
  /// Try sampled build directions and keep the first printable one.
  bool orientation_search = false;
  int orientation_candidates = 32;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PlanReport {
  std::string model;
  std::string mode;
  std::string preset;
  std::uint64_t seed = 0;
  int layers = 0;
  int dep_nodes = 0;
  int dep_edges = 0;
  int collision_edges = 0;
  int init_nodes = 0;
  int flat_opps = 0;   // #OF
  int curved_opps = 0; // #OO
  int transfer_count = 0;
  double total_path_length = 0.0;
  double transfer_length = 0.0;
  double estimated_time = 0.0;
  int support_regions = 0;
  int low_slope_regions = 0;
  Point build_direction{0.0, 0.0, 1.0};
  std::vector<StageTiming> timings;

  /// JSON object; timings are omitted when `with_timings` is false.
  std::string to_json(bool with_timings = true) const;
};

struct PipelineResult {
  SurfaceModel model;
  SlicedModel sliced;
  DepGraph dep;
  InitGraph init;
  SupportReport support;
  std::optional<FlatOppGraph> flat;
  CurvedOppGraph curved;
  std::vector<int> order;
  PrintPlan plan;
  PlanReport report;
  std::vector<LowSlopeRegion> low_slope;
};

/// Rotates the model so `up` becomes +z. Profiles rotate within the XZ plane and use only
/// the x and z components of `up`.
SurfaceModel orient_model(const SurfaceModel &model, const Point &up);

/// Candidate build directions, starting with +z.
std::vector<Point> candidate_directions(const SurfaceModel &model, int count);

/// Slice, dependency graph, init graph, beam search, curved merging, toolpaths, plan.
PipelineResult run_pipeline(const SurfaceModel &model, const PrinterConfig &cfg, const PipelineOptions &opts = {});

} // namespace acap
