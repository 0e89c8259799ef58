#include "acap/opp_graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

#include <fmt/format.h>

namespace acap {

const char *to_string(EdgeKind kind) { return kind == EdgeKind::geometric ? "geometric" : "collision"; }

void Dag::add_edge(int from, int to, EdgeKind kind) {
  if (from < 0 || to < 0 || from >= size() || to >= size())
    throw Error(fmt::format("edge ({}, {}) outside graph of {} nodes", from, to, size()));
  if (from == to)
    throw Error(fmt::format("self loop on node {}", from));
  auto [it, inserted] = kind_.try_emplace({from, to}, kind);
  if (!inserted) {
    if (kind == EdgeKind::collision)
      it->second = kind;
    return;
  }
  succ_[from].insert(std::lower_bound(succ_[from].begin(), succ_[from].end(), to), to);
  pred_[to].insert(std::lower_bound(pred_[to].begin(), pred_[to].end(), from), from);
}

void Dag::remove_edge(int from, int to) {
  if (kind_.erase({from, to}) == 0)
    return;
  std::erase(succ_[from], to);
  std::erase(pred_[to], from);
}

std::optional<EdgeKind> Dag::edge_kind(int from, int to) const {
  auto it = kind_.find({from, to});
  if (it == kind_.end())
    return std::nullopt;
  return it->second;
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  out.reserve(kind_.size());
  for (const auto &[key, kind] : kind_)
    out.push_back({key.first, key.second, kind});
  return out;
}

std::optional<std::vector<int>> Dag::topological_order() const {
  std::vector<int> indeg(size());
  for (int n = 0; n < size(); ++n)
    indeg[n] = static_cast<int>(pred_[n].size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int n = 0; n < size(); ++n)
    if (indeg[n] == 0)
      ready.push(n);
  std::vector<int> order;
  order.reserve(size());
  while (!ready.empty()) {
    const int n = ready.top();
    ready.pop();
    order.push_back(n);
    for (int s : succ_[n])
      if (--indeg[s] == 0)
        ready.push(s);
  }
  if (static_cast<int>(order.size()) != size())
    return std::nullopt;
  return order;
}

std::vector<NodeSet> reachability(const Dag &g) {
  const auto order = g.topological_order();
  if (!order)
    throw Error("reachability requires an acyclic graph");
  std::vector<NodeSet> reach(g.size(), NodeSet(g.size()));
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    for (int s : g.successors(*it)) {
      reach[*it].insert(s);
      reach[*it] |= reach[s];
    }
  }
  return reach;
}

Dag transitive_reduce(const Dag &g) {
  const auto reach = reachability(g);
  Dag out(g.size());
  for (int u = 0; u < g.size(); ++u) {
    NodeSet via(g.size());
    for (int w : g.successors(u))
      via |= reach[w];
    for (int v : g.successors(u))
      if (!via.contains(v))
        out.add_edge(u, v, *g.edge_kind(u, v));
  }
  return out;
}

DepGraph build_dep_graph(const SlicedModel &sliced, double path_width) {
  DepGraph g(static_cast<int>(sliced.elements.size()));
  for (std::size_t layer = 0; layer + 1 < sliced.layers.size(); ++layer)
    for (int a : sliced.layers[layer])
      for (int b : sliced.layers[layer + 1])
        if (element_distance(sliced.elements[a], sliced.elements[b]) < path_width)
          g.add_edge(a, b, EdgeKind::geometric);
  return g;
}

DepGraph add_collision_edges(const DepGraph &g, const SlicedModel &sliced, const NozzleModel &nozzle,
                             const RibbonModel &ribbon) {
  struct Box {
    double x0, x1, y0, y1;
  };
  std::vector<Box> boxes;
  boxes.reserve(sliced.elements.size());
  for (const auto &e : sliced.elements) {
    Box b{e.points[0].x, e.points[0].x, e.points[0].y, e.points[0].y};
    for (const auto &p : e.points) {
      b.x0 = std::min(b.x0, p.x);
      b.x1 = std::max(b.x1, p.x);
      b.y0 = std::min(b.y0, p.y);
      b.y1 = std::max(b.y1, p.y);
    }
    boxes.push_back(b);
  }
  const double reach = nozzle.radius_at(1e300) + ribbon.half_width;

  Dag out = g;
  for (const auto &x : sliced.elements) {
    for (const auto &y : sliced.elements) {
      if (y.layer_index <= x.layer_index + 1)
        continue;
      const Box &bx = boxes[x.id];
      const Box &by = boxes[y.id];
      const double gap = std::hypot(std::max({0.0, bx.x0 - by.x1, by.x0 - bx.x1}),
                                    std::max({0.0, bx.y0 - by.y1, by.y0 - bx.y1}));
      if (gap >= reach)
        continue;
      if (nozzle_collides(x, y, nozzle, ribbon) && !out.has_edge(x.id, y.id))
        out.add_edge(x.id, y.id, EdgeKind::collision);
    }
  }
  if (!out.acyclic())
    throw UnprintableOrientation("collision constraints form a dependency cycle; the orientation is unprintable");
  return transitive_reduce(out);
}

InitGraph build_init_graph(const Dag &g, std::span<const LayerElement> elements) {
  const int n = g.size();
  auto kept = [&](int u, int v) {
    if (*g.edge_kind(u, v) != EdgeKind::geometric)
      return false;
    if (g.successors(u).size() != 1 || g.predecessors(v).size() != 1)
      return false;
    if (!elements.empty() && elements[u].kind != elements[v].kind)
      return false;
    return true;
  };

  InitGraph out;
  out.owner.assign(n, -1);
  for (int start = 0; start < n; ++start) {
    const bool has_kept_pred = !g.predecessors(start).empty() && kept(g.predecessors(start)[0], start);
    if (has_kept_pred)
      continue;
    std::vector<int> chain{start};
    int cur = start;
    while (!g.successors(cur).empty() && kept(cur, g.successors(cur)[0])) {
      cur = g.successors(cur)[0];
      chain.push_back(cur);
    }
    for (int e : chain)
      out.owner[e] = static_cast<int>(out.chains.size());
    out.chains.push_back(std::move(chain));
  }
  out.dag = Dag(static_cast<int>(out.chains.size()));
  for (const Edge &e : g.edges()) {
    const int a = out.owner[e.from];
    const int b = out.owner[e.to];
    if (a != b)
      out.dag.add_edge(a, b, e.kind);
  }
  return out;
}

bool has_multiple_paths(const Dag &g, int u, int v) {
  if (u == v)
    return false;
  const auto order = g.topological_order();
  if (!order)
    throw Error("path counting requires an acyclic graph");
  std::vector<int> count(g.size(), 0);
  count[u] = 1;
  for (int n : *order) {
    if (count[n] == 0)
      continue;
    if (n == v)
      break;
    for (int s : g.successors(n))
      count[s] = std::min(2, count[s] + count[n]);
  }
  return count[v] >= 2;
}

bool is_valid_topological_order(const Dag &g, std::span<const int> order) {
  if (static_cast<int>(order.size()) != g.size())
    return false;
  std::vector<int> pos(g.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int n = order[i];
    if (n < 0 || n >= g.size() || pos[n] >= 0)
      return false;
    pos[n] = static_cast<int>(i);
  }
  for (const Edge &e : g.edges())
    if (pos[e.from] > pos[e.to])
      return false;
  return true;
}

void write_graph(std::ostream &out, const Dag &g, std::span<const std::vector<int>> labels) {
  out << "graph " << g.size() << '\n';
  for (int n = 0; n < g.size(); ++n) {
    out << "node " << n;
    if (static_cast<std::size_t>(n) < labels.size())
      for (int l : labels[n])
        out << ' ' << l;
    out << '\n';
  }
  for (const Edge &e : g.edges())
    out << "edge " << e.from << ' ' << e.to << ' ' << to_string(e.kind) << '\n';
  out << "end\n";
}

LabeledGraph read_graph(std::istream &in) {
  LabeledGraph out;
  std::string line;
  bool started = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head))
      continue;
    if (head == "graph") {
      int n = -1;
      if (!(ls >> n) || n < 0)
        throw Error(fmt::format("graph line {}: expected node count", line_no));
      out.dag = Dag(n);
      out.labels.assign(n, {});
      started = true;
    } else if (!started) {
      throw Error(fmt::format("graph line {}: missing 'graph <n>' header", line_no));
    } else if (head == "node") {
      int id = -1;
      if (!(ls >> id) || id < 0 || id >= out.dag.size())
        throw Error(fmt::format("graph line {}: bad node id", line_no));
      int l;
      while (ls >> l)
        out.labels[id].push_back(l);
    } else if (head == "edge") {
      int a = -1, b = -1;
      std::string kind = "geometric";
      if (!(ls >> a >> b))
        throw Error(fmt::format("graph line {}: expected 'edge <from> <to> [kind]'", line_no));
      ls >> kind;
      if (kind != "geometric" && kind != "collision")
        throw Error(fmt::format("graph line {}: unknown edge kind '{}'", line_no, kind));
      out.dag.add_edge(a, b, kind == "geometric" ? EdgeKind::geometric : EdgeKind::collision);
    } else if (head == "end") {
      break;
    } else {
      throw Error(fmt::format("graph line {}: unknown record '{}'", line_no, head));
    }
  }
  if (!started)
    throw Error("graph: empty document");
  if (!out.dag.acyclic())
    throw Error("graph: edges form a cycle");
  return out;
}

} // namespace acap
