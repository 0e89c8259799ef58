#pragma once

#include <vector>

#include "acap/node_set.hpp"
#include "acap/opp_graph.hpp"

namespace acap {

/// One merged I-OPP per path; each path lists init-graph nodes (sub-OPPs) in print order.
/// `paths` are kept in a feasible printing order; `dag` carries the inherited dependencies
/// between paths.
struct FlatOppGraph {
  std::vector<std::vector<int>> paths;
  Dag dag;

  int size() const { return static_cast<int>(paths.size()); }
  /// Paths sorted, ignoring printing order.
  std::vector<std::vector<int>> partition() const;
};

/// Builds the path graph for a cover given in printing order.
FlatOppGraph make_flat_graph(const Dag &init, std::vector<std::vector<int>> paths);

/// True when `paths`, replayed in order, partition the nodes, follow geometric edges,
/// and never print a node before its dependencies.
bool is_valid_path_cover(const Dag &g, const std::vector<std::vector<int>> &paths);

/// Every maximal precedence-feasible path that starts at a ready node
/// (uncovered, all dependencies covered), extending along geometric edges.
std::vector<std::vector<int>> greedy_traversals(const Dag &g, const NodeSet &covered);

struct BeamSearchOptions {
  int beam_width = 10000;
  /// Upper bound on the optimal covers returned.
  int max_results = 64;
  /// Upper bound on root-to-leaf sequences replayed when collecting covers.
  int max_replays = 200000;
};

/// Level-by-level beam search over the cover solution space. All returned graphs share
/// the smallest path count found at the first level containing complete covers.
std::vector<FlatOppGraph> beam_search_path_covers(const Dag &g, const BeamSearchOptions &opts = {});

struct PathCover {
  int path_count = 0;
  std::vector<std::vector<int>> paths;
};

/// Exhaustive minimum over all precedence-feasible covers (including non-maximal paths).
/// Throws Error above `max_nodes` nodes.
PathCover exact_min_path_cover(const Dag &g, int max_nodes = 20);

} // namespace acap
