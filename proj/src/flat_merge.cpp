#include "acap/flat_merge.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

namespace acap {

namespace {

bool is_ready(const Dag &g, const NodeSet &covered, int n) {
  if (covered.contains(n))
    return false;
  for (int p : g.predecessors(n))
    if (!covered.contains(p))
      return false;
  return true;
}

void extend_maximal(const Dag &g, const NodeSet &covered, NodeSet &in_path, std::vector<int> &path,
                    std::vector<std::vector<int>> &out) {
  const int last = path.back();
  bool extended = false;
  for (int s : g.successors(last)) {
    if (*g.edge_kind(last, s) != EdgeKind::geometric || covered.contains(s) || in_path.contains(s))
      continue;
    bool deps_met = true;
    for (int p : g.predecessors(s))
      if (!covered.contains(p) && !in_path.contains(p)) {
        deps_met = false;
        break;
      }
    if (!deps_met)
      continue;
    extended = true;
    path.push_back(s);
    in_path.insert(s);
    extend_maximal(g, covered, in_path, path, out);
    in_path.erase(s);
    path.pop_back();
  }
  if (!extended)
    out.push_back(path);
}

struct SolutionNode {
  NodeSet covered;
  std::vector<int> path;
  std::vector<int> parents; // indices into the previous level
  int covered_count = 0;
};

std::size_t solution_hash(const NodeSet &covered, const std::vector<int> &path) {
  std::size_t h = covered.hash();
  for (int v : path)
    h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
  return h;
}

/// Collects distinct covers by replaying parent links from complete nodes back to the root.
class CoverCollector {
public:
  CoverCollector(const std::vector<std::vector<SolutionNode>> &levels, const BeamSearchOptions &opts)
      : levels_(levels), opts_(opts) {}

  void collect(int level, int index) {
    stack_.clear();
    walk(level, index);
  }

  std::vector<std::vector<std::vector<int>>> take() { return std::move(results_); }

private:
  void walk(int level, int index) {
    if (full())
      return;
    if (level == 0) {
      ++replays_;
      std::vector<std::vector<int>> ordered(stack_.rbegin(), stack_.rend());
      auto key = ordered;
      std::sort(key.begin(), key.end());
      if (seen_.insert(key).second)
        results_.push_back(std::move(ordered));
      return;
    }
    const SolutionNode &node = levels_[level][index];
    stack_.push_back(node.path);
    for (int parent : node.parents) {
      walk(level - 1, parent);
      if (full())
        break;
    }
    stack_.pop_back();
  }

  bool full() const {
    return static_cast<int>(results_.size()) >= opts_.max_results || replays_ >= opts_.max_replays;
  }

  const std::vector<std::vector<SolutionNode>> &levels_;
  const BeamSearchOptions &opts_;
  std::vector<std::vector<int>> stack_;
  std::set<std::vector<std::vector<int>>> seen_;
  std::vector<std::vector<std::vector<int>>> results_;
  int replays_ = 0;
};

} // namespace

std::vector<std::vector<int>> FlatOppGraph::partition() const {
  auto out = paths;
  std::sort(out.begin(), out.end());
  return out;
}

FlatOppGraph make_flat_graph(const Dag &init, std::vector<std::vector<int>> paths) {
  FlatOppGraph out;
  std::vector<int> owner(init.size(), -1);
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (int n : paths[p])
      owner[n] = static_cast<int>(p);
  out.dag = Dag(static_cast<int>(paths.size()));
  for (const Edge &e : init.edges())
    if (owner[e.from] != owner[e.to])
      out.dag.add_edge(owner[e.from], owner[e.to], e.kind);
  out.paths = std::move(paths);
  return out;
}

bool is_valid_path_cover(const Dag &g, const std::vector<std::vector<int>> &paths) {
  NodeSet covered(g.size());
  int total = 0;
  for (const auto &path : paths) {
    if (path.empty())
      return false;
    for (std::size_t i = 0; i < path.size(); ++i) {
      const int n = path[i];
      if (n < 0 || n >= g.size() || covered.contains(n))
        return false;
      if (i > 0 && g.edge_kind(path[i - 1], n) != EdgeKind::geometric)
        return false;
      for (int p : g.predecessors(n))
        if (!covered.contains(p))
          return false;
      covered.insert(n);
      ++total;
    }
  }
  return total == g.size();
}

std::vector<std::vector<int>> greedy_traversals(const Dag &g, const NodeSet &covered) {
  std::vector<std::vector<int>> out;
  NodeSet in_path(g.size());
  for (int n = 0; n < g.size(); ++n) {
    if (!is_ready(g, covered, n))
      continue;
    std::vector<int> path{n};
    in_path.insert(n);
    extend_maximal(g, covered, in_path, path, out);
    in_path.erase(n);
  }
  return out;
}

std::vector<FlatOppGraph> beam_search_path_covers(const Dag &g, const BeamSearchOptions &opts) {
  if (opts.beam_width < 1)
    throw Error("beam width must be >= 1");
  if (!g.acyclic())
    throw Error("beam search requires an acyclic graph");
  const int n = g.size();
  if (n == 0)
    return {make_flat_graph(g, {})};

  std::vector<std::vector<SolutionNode>> levels;
  levels.push_back({SolutionNode{NodeSet(n), {}, {}, 0}});

  for (;;) {
    const auto &previous = levels.back();
    std::vector<SolutionNode> candidates;
    // Same covered set and same last path share one solution node.
    std::unordered_map<std::size_t, std::vector<int>> index;
    for (std::size_t p = 0; p < previous.size(); ++p) {
      const SolutionNode &node = previous[p];
      for (auto &path : greedy_traversals(g, node.covered)) {
        NodeSet covered = node.covered;
        for (int v : path)
          covered.insert(v);
        auto &bucket = index[solution_hash(covered, path)];
        int match = -1;
        for (int c : bucket)
          if (candidates[c].path == path && candidates[c].covered == covered)
            match = c;
        if (match >= 0) {
          auto &parents = candidates[match].parents;
          if (parents.back() != static_cast<int>(p))
            parents.push_back(static_cast<int>(p));
          continue;
        }
        bucket.push_back(static_cast<int>(candidates.size()));
        SolutionNode fresh;
        fresh.covered_count = covered.count();
        fresh.covered = std::move(covered);
        fresh.path = std::move(path);
        fresh.parents = {static_cast<int>(p)};
        candidates.push_back(std::move(fresh));
      }
    }
    if (candidates.empty())
      throw Error("beam search stalled: no traversal available");

    std::vector<int> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const SolutionNode &x = candidates[a];
      const SolutionNode &y = candidates[b];
      if (x.covered_count != y.covered_count)
        return x.covered_count > y.covered_count;
      if (x.covered.lex_less(y.covered))
        return true;
      if (y.covered.lex_less(x.covered))
        return false;
      return x.path < y.path;
    });
    if (static_cast<int>(order.size()) > opts.beam_width)
      order.resize(opts.beam_width);

    std::vector<SolutionNode> kept;
    kept.reserve(order.size());
    for (int i : order)
      kept.push_back(std::move(candidates[i]));
    levels.push_back(std::move(kept));

    const auto &level = levels.back();
    if (level.front().covered_count == n) {
      CoverCollector collector(levels, opts);
      const int depth = static_cast<int>(levels.size()) - 1;
      for (std::size_t i = 0; i < level.size() && level[i].covered_count == n; ++i)
        collector.collect(depth, static_cast<int>(i));
      std::vector<FlatOppGraph> out;
      for (auto &cover : collector.take())
        out.push_back(make_flat_graph(g, std::move(cover)));
      return out;
    }
  }
}

PathCover exact_min_path_cover(const Dag &g, int max_nodes) {
  const int n = g.size();
  if (n > max_nodes || n > 24)
    throw Error(fmt::format("exact path cover limited to {} nodes, graph has {}", std::min(max_nodes, 24), n));
  if (!g.acyclic())
    throw Error("exact path cover requires an acyclic graph");

  using Mask = std::uint32_t;
  const Mask full = n == 0 ? 0 : static_cast<Mask>((std::uint64_t{1} << n) - 1);
  std::vector<Mask> pred_mask(n, 0);
  for (const Edge &e : g.edges())
    pred_mask[e.to] |= Mask{1} << e.from;

  constexpr int kUnknown = -1;
  std::vector<int> best(static_cast<std::size_t>(full) + 1, kUnknown);
  std::vector<Mask> choice(static_cast<std::size_t>(full) + 1, 0);
  std::vector<std::vector<int>> choice_path(static_cast<std::size_t>(full) + 1);

  // Memoised over covered sets; every prefix of every feasible path is a candidate.
  auto solve = [&](auto &&self, Mask covered) -> int {
    if (covered == full)
      return 0;
    if (best[covered] != kUnknown)
      return best[covered];
    int result = std::numeric_limits<int>::max();
    std::vector<int> path;
    auto grow = [&](auto &&grow_self, Mask in_path) -> void {
      const Mask after = covered | in_path;
      const int sub = self(self, after);
      if (sub + 1 < result) {
        result = sub + 1;
        choice[covered] = after;
        choice_path[covered] = path;
      }
      const int last = path.back();
      for (int s : g.successors(last)) {
        const Mask bit = Mask{1} << s;
        if ((after & bit) || *g.edge_kind(last, s) != EdgeKind::geometric)
          continue;
        if ((pred_mask[s] & ~after) != 0)
          continue;
        path.push_back(s);
        grow_self(grow_self, in_path | bit);
        path.pop_back();
      }
    };
    for (int v = 0; v < n; ++v) {
      const Mask bit = Mask{1} << v;
      if ((covered & bit) || (pred_mask[v] & ~covered) != 0)
        continue;
      path = {v};
      grow(grow, bit);
    }
    best[covered] = result;
    return result;
  };

  PathCover out;
  out.path_count = solve(solve, 0);
  for (Mask m = 0; m != full; m = choice[m])
    out.paths.push_back(choice_path[m]);
  return out;
}

} // namespace acap
