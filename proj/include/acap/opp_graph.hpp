#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "acap/geometry.hpp"
#include "acap/node_set.hpp"

namespace acap {

/// Geometric edges join stackable neighbours; collision edges only order printing.
enum class EdgeKind { geometric, collision };

const char *to_string(EdgeKind kind);

struct Edge {
  int from = 0;
  int to = 0;
  EdgeKind kind = EdgeKind::geometric;
  auto operator<=>(const Edge &) const = default;
};

/// Directed graph over nodes 0..size()-1 with at most one edge per ordered pair.
class Dag {
public:
  Dag() = default;
  explicit Dag(int node_count) : succ_(node_count), pred_(node_count) {}

  int size() const { return static_cast<int>(succ_.size()); }
  int edge_count() const { return static_cast<int>(kind_.size()); }

  /// Adds an edge; when the pair already exists a collision kind overrides geometric.
  void add_edge(int from, int to, EdgeKind kind);
  void remove_edge(int from, int to);
  bool has_edge(int from, int to) const { return kind_.contains({from, to}); }
  std::optional<EdgeKind> edge_kind(int from, int to) const;

  const std::vector<int> &successors(int n) const { return succ_[n]; }
  const std::vector<int> &predecessors(int n) const { return pred_[n]; }

  /// All edges ordered by (from, to).
  std::vector<Edge> edges() const;

  /// Kahn order taking the smallest ready id first; nullopt when cyclic.
  std::optional<std::vector<int>> topological_order() const;
  bool acyclic() const { return topological_order().has_value(); }

  bool operator==(const Dag &o) const { return kind_ == o.kind_ && size() == o.size(); }

private:
  std::vector<std::vector<int>> succ_;
  std::vector<std::vector<int>> pred_;
  std::map<std::pair<int, int>, EdgeKind> kind_;
};

/// Dependency graph: node i is element id i of the slicing.
using DepGraph = Dag;

/// Raised when collision constraints make the dependencies cyclic.
class UnprintableOrientation : public Error {
public:
  using Error::Error;
};

/// Stacked I-OPPs: node i prints `chains[i]` (element ids in layer order).
struct InitGraph {
  Dag dag;
  std::vector<std::vector<int>> chains;
  /// Element id to owning node.
  std::vector<int> owner;
};

/// Descendant sets, excluding the node itself.
std::vector<NodeSet> reachability(const Dag &g);

DepGraph build_dep_graph(const SlicedModel &sliced, double path_width);

/// Inserts x->y for every pair where printing x would collide with printed y, then reduces.
DepGraph add_collision_edges(const DepGraph &g, const SlicedModel &sliced, const NozzleModel &nozzle,
                             const RibbonModel &ribbon);

/// Unique transitive reduction; edge kinds of surviving edges are kept.
Dag transitive_reduce(const Dag &g);

/// Contracts forced chains. When `elements` is given, a chain never mixes segments and contours.
InitGraph build_init_graph(const Dag &g, std::span<const LayerElement> elements = {});

/// Whether two or more distinct directed paths lead from u to v.
bool has_multiple_paths(const Dag &g, int u, int v);

bool is_valid_topological_order(const Dag &g, std::span<const int> order);

/// Graph plus optional per-node labels (element ids for dependency graphs, chains for init graphs).
struct LabeledGraph {
  Dag dag;
  std::vector<std::vector<int>> labels;
};

/// Text format:
///
///     graph <node count>
///     node <id> [label ids...]
///     edge <from> <to> geometric|collision
///     end
void write_graph(std::ostream &out, const Dag &g, std::span<const std::vector<int>> labels = {});
LabeledGraph read_graph(std::istream &in);

} // namespace acap
