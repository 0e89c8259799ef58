#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acap/flat_merge.hpp"
#include "acap/geometry.hpp"
#include "acap/opp_graph.hpp"

namespace acap {

/// A value or the reason it could not be produced.
template <typename T> struct Outcome {
  std::optional<T> value;
  std::string reason;

  static Outcome ok(T v) { return {std::move(v), {}}; }
  static Outcome refuse(std::string why) { return {std::nullopt, std::move(why)}; }
  explicit operator bool() const { return value.has_value(); }
  const T &operator*() const { return *value; }
  const T *operator->() const { return &*value; }
};

// ---------------------------------------------------------------------------
// Curved layer stacks

struct StackLimits {
  double t_min = 0.5;
  double t_max = 2.5;
  double tan_max = 0.57735026918962573; // tan 30deg
};

/// Per-column layer heights. heights[k][c] is the height of layer k at columns[c].
struct CurvedLayerStack {
  std::vector<double> columns;
  std::vector<std::vector<double>> heights;
  /// Thickness reported for a single-layer stack.
  double base_thickness = 0.0;

  int layer_count() const { return static_cast<int>(heights.size()); }
  int column_count() const { return static_cast<int>(columns.size()); }
  /// Deposited thickness of layer k at column c. The bottom layer takes the gap above it.
  double thickness(int k, int c) const;
  Polyline layer_polyline(int k) const;
};

/// Bottom and top boundary of a 2D material region sampled at evenly spaced columns.
struct ColumnRegion {
  std::vector<double> x;
  std::vector<double> bottom;
  std::vector<double> top;
  /// Staircase values before smoothing (layer centres of the lowest/highest covering layer).
  std::vector<double> raw_bottom;
  std::vector<double> raw_top;
  /// Element owning the lowest/highest covering layer of each column.
  std::vector<int> bottom_element;
  std::vector<int> top_element;
};

/// Samples the union of segment elements. Refused when a column is empty or its covering
/// layers are not contiguous. Slanted walls are smoothed from the staircase into the
/// piecewise-linear boundary through the element endpoints.
Outcome<ColumnRegion> column_region(const SlicedModel &sliced, std::span<const int> element_ids, double spacing);

/// Target boundaries of a patch. Every polyline is x-monotone and lies in the XZ plane.
struct TargetFlatAreas {
  std::vector<Polyline> top;
  std::vector<Polyline> bottom;
  /// Top boundary pieces that belong to neither input's top (the shoulders of a merge).
  std::vector<Polyline> obliques;
};

/// Interpolates the region between bottom and top with the smallest layer count whose
/// gaps lie in [t_min, t_max] at every column and whose layers respect the slope limit.
/// Target polylines override the region boundary where they cover a column.
Outcome<CurvedLayerStack> curved_layer_feasibility(const ColumnRegion &region, const TargetFlatAreas &areas,
                                                   const StackLimits &limits);

/// Violations of the thickness, slope and ordering invariants; empty when the stack is sound.
std::vector<std::string> audit_stack(const CurvedLayerStack &stack, const StackLimits &limits);

/// Text format:
///
///     stack <layers> <columns>
///     x <x0> <x1> ...
///     layer <k> <z0> <z1> ...
///     end
void write_stack(std::ostream &out, const CurvedLayerStack &stack);
CurvedLayerStack read_stack(std::istream &in);

// ---------------------------------------------------------------------------
// Patches

/// A stacked run of init-graph nodes printed as flat layers, or a curved block.
struct SubOpp {
  std::vector<int> init_nodes;
  /// Element ids ordered by layer.
  std::vector<int> elements;
  std::optional<CurvedLayerStack> curved;

  bool is_curved() const { return curved.has_value(); }
};

enum class PatchType { I, II, III };
const char *to_string(PatchType t);

struct OppPatch {
  int id = 0;
  std::vector<SubOpp> sub_opps;
  TargetFlatAreas target_areas;

  PatchType type() const;
  std::vector<int> elements() const;
  std::vector<int> init_nodes() const;
  int layer_count() const;
};

struct CurvedOppGraph {
  std::vector<OppPatch> patches;
  Dag dag;

  int size() const { return static_cast<int>(patches.size()); }
  int total_layers() const;
};

struct MergeContext {
  const SlicedModel &sliced;
  const DepGraph &dep;
  const InitGraph &init;
  StackLimits limits;
  double path_width = 6.0;
  double connect_threshold = 5.0;
  bool curving_enabled = true;
  /// Stacking may rely on an extra path along the lower layer when endpoints are far apart.
  bool allow_extra_path = true;
  /// When set, consecutive flat sub-OPPs of one collision-free chain are restacked first.
  const InitGraph *collision_free_init = nullptr;

  double column_spacing() const { return path_width / 4.0; }
};

SubOpp make_flat_sub_opp(const InitGraph &init, std::span<const int> init_nodes, const SlicedModel &sliced);

/// Top and bottom areas of a patch: the sub-OPP boundaries that lie on its envelope.
TargetFlatAreas patch_target_areas(const OppPatch &patch, const MergeContext &ctx);

/// `a` printed directly on top of `b`; the result prints b's sub-OPPs, then a's.
Outcome<OppPatch> stacking_merge(const OppPatch &a, const OppPatch &b, const MergeContext &ctx);

/// Target areas of `a` curved together with the lower patch `b`.
Outcome<TargetFlatAreas> combine_target_areas(const OppPatch &a, const OppPatch &b, const MergeContext &ctx);

/// One curved sub-OPP covering both patches' material.
Outcome<OppPatch> curving_merge(const OppPatch &a, const OppPatch &b, const MergeContext &ctx);

/// One patch per path of the flat cover, with its edges inherited from the init graph.
CurvedOppGraph curved_graph_from_flat(const FlatOppGraph &flat, const MergeContext &ctx);

/// Rebuilds patch ids and the dependency edges from the init-graph edges.
void rebuild_edges(CurvedOppGraph &g, const InitGraph &init);

CurvedOppGraph pairwise_merge(const CurvedOppGraph &g, const MergeContext &ctx, std::uint64_t seed);

/// Fewest patches, then fewest layers, then the earliest graph.
const CurvedOppGraph &select_best(std::span<const CurvedOppGraph> graphs);

} // namespace acap
