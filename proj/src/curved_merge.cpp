#include "acap/curved_merge.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <random>

#include <fmt/format.h>

namespace acap {

namespace {

constexpr double kEps = 1e-9;

std::pair<int, int> layer_range(const SubOpp &s, const SlicedModel &sliced) {
  int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
  for (int e : s.elements) {
    lo = std::min(lo, sliced.elements[e].layer_index);
    hi = std::max(hi, sliced.elements[e].layer_index);
  }
  return {lo, hi};
}

std::vector<int> elements_on_layer(const SubOpp &s, const SlicedModel &sliced, int layer) {
  std::vector<int> out;
  for (int e : s.elements)
    if (sliced.elements[e].layer_index == layer)
      out.push_back(e);
  return out;
}

Polyline sub_top(const SubOpp &s, const SlicedModel &sliced) {
  if (s.curved)
    return s.curved->layer_polyline(s.curved->layer_count() - 1);
  return sliced.elements[s.elements.back()].points;
}

Polyline sub_bottom(const SubOpp &s, const SlicedModel &sliced) {
  if (s.curved)
    return s.curved->layer_polyline(0);
  return sliced.elements[s.elements.front()].points;
}

NodeSet member_set(std::span<const int> ids, int capacity) {
  NodeSet out(capacity);
  for (int e : ids)
    out.insert(e);
  return out;
}

bool edge_between(const DepGraph &dep, std::span<const int> from, const NodeSet &to, EdgeKind kind) {
  for (int e : from)
    for (int s : dep.successors(e))
      if (to.contains(s) && *dep.edge_kind(e, s) == kind)
        return true;
  return false;
}

bool collision_between(const DepGraph &dep, std::span<const int> a, std::span<const int> b, int capacity) {
  return edge_between(dep, a, member_set(b, capacity), EdgeKind::collision) ||
         edge_between(dep, b, member_set(a, capacity), EdgeKind::collision);
}

std::optional<double> z_at(const Polyline &poly, double x) {
  if (poly.empty() || x < poly.front().x - kEps || x > poly.back().x + kEps)
    return std::nullopt;
  if (poly.size() == 1)
    return poly.front().z;
  auto it = std::lower_bound(poly.begin(), poly.end(), x, [](const Point &p, double v) { return p.x < v; });
  if (it == poly.begin())
    return it->z;
  if (it == poly.end())
    return poly.back().z;
  const Point &b = *it;
  const Point &a = *(it - 1);
  if (b.x - a.x <= 0.0)
    return b.z;
  return a.z + (x - a.x) / (b.x - a.x) * (b.z - a.z);
}

Polyline sorted_by_x(Polyline p) {
  std::stable_sort(p.begin(), p.end(), [](const Point &a, const Point &b) { return a.x < b.x; });
  return p;
}

/// Pieces of `raw`'s footprint over columns whose top (or bottom) covering element belongs to `owner`.
std::vector<Polyline> on_envelope(const Polyline &raw, const NodeSet &owner, const ColumnRegion &region, bool top) {
  const Polyline poly = sorted_by_x(raw);
  std::vector<Polyline> out;
  Polyline run;
  for (std::size_t c = 0; c < region.x.size(); ++c) {
    const auto z = z_at(poly, region.x[c]);
    const int el = top ? region.top_element[c] : region.bottom_element[c];
    if (z && owner.contains(el)) {
      // Sampled on the smoothed boundary so the piece joins its neighbours without a step.
      run.push_back({region.x[c], 0.0, top ? region.top[c] : region.bottom[c]});
      continue;
    }
    if (run.size() >= 2)
      out.push_back(std::move(run));
    run.clear();
  }
  if (run.size() >= 2)
    out.push_back(std::move(run));
  return out;
}

struct Combined {
  TargetFlatAreas areas;
  ColumnRegion region;
};

std::vector<int> union_elements(const OppPatch &a, const OppPatch &b) {
  auto out = b.elements();
  const auto ae = a.elements();
  out.insert(out.end(), ae.begin(), ae.end());
  return out;
}

bool contour_only(const OppPatch &p, const SlicedModel &sliced) {
  for (int e : p.elements())
    if (sliced.elements[e].kind != ElementKind::contour)
      return false;
  return true;
}

Outcome<Combined> combine_impl(const OppPatch &a, const OppPatch &b, const MergeContext &ctx) {
  using Result = Outcome<Combined>;
  if (!ctx.curving_enabled)
    return Result::refuse("curving disabled");
  if (contour_only(a, ctx.sliced) && contour_only(b, ctx.sliced))
    return Result::refuse("both patches consist of closed contours");
  const auto ae = a.elements();
  const auto be = b.elements();
  const int cap = static_cast<int>(ctx.sliced.elements.size());
  if (!edge_between(ctx.dep, be, member_set(ae, cap), EdgeKind::geometric))
    return Result::refuse("no geometric dependency from the lower patch to the upper");
  if (collision_between(ctx.dep, ae, be, cap))
    return Result::refuse("collision dependency between the patches");

  const auto all = union_elements(a, b);
  auto region = column_region(ctx.sliced, all, ctx.column_spacing());
  if (!region)
    return Result::refuse(region.reason);

  Combined out;
  out.region = std::move(*region.value);
  const ColumnRegion &r = out.region;
  for (const OppPatch *p : {&a, &b}) {
    for (const SubOpp &s : p->sub_opps) {
      const NodeSet owner = member_set(s.elements, cap);
      for (auto &piece : on_envelope(sub_top(s, ctx.sliced), owner, r, true))
        out.areas.top.push_back(std::move(piece));
      for (auto &piece : on_envelope(sub_bottom(s, ctx.sliced), owner, r, false))
        out.areas.bottom.push_back(std::move(piece));
    }
  }

  // Uncovered top columns are shoulders between the two patches.
  const int n = static_cast<int>(r.x.size());
  std::vector<char> covered(n, 0);
  for (const auto &poly : out.areas.top)
    for (int c = 0; c < n; ++c)
      if (r.x[c] >= poly.front().x - kEps && r.x[c] <= poly.back().x + kEps)
        covered[c] = 1;
  std::vector<Polyline> valid;
  int violating = 0;
  for (int c = 0; c < n;) {
    if (covered[c]) {
      ++c;
      continue;
    }
    int end = c;
    while (end + 1 < n && !covered[end + 1])
      ++end;
    Polyline oblique;
    for (int k = std::max(0, c - 1); k <= std::min(n - 1, end + 1); ++k)
      oblique.push_back({r.x[k], 0.0, r.top[k]});
    bool steep = false;
    for (std::size_t i = 0; i + 1 < oblique.size(); ++i) {
      const double dx = oblique[i + 1].x - oblique[i].x;
      if (std::abs(oblique[i + 1].z - oblique[i].z) > ctx.limits.tan_max * dx + kEps)
        steep = true;
    }
    if (steep)
      ++violating;
    else if (oblique.size() >= 2)
      valid.push_back(std::move(oblique));
    c = end + 1;
  }
  if (violating > 0 && valid.empty())
    return Result::refuse("every oblique exceeds the slope limit");
  out.areas.obliques = std::move(valid);
  return Result::ok(std::move(out));
}

OppPatch single(const SubOpp &s, int id) {
  OppPatch p;
  p.id = id;
  p.sub_opps = {s};
  return p;
}

/// `upper` printed directly after `lower` with flat layers between them.
std::string stack_refusal(const SubOpp &lower, const SubOpp &upper, const MergeContext &ctx) {
  const auto [llo, lhi] = layer_range(lower, ctx.sliced);
  const auto [ulo, uhi] = layer_range(upper, ctx.sliced);
  (void)llo;
  (void)uhi;
  if (ulo != lhi + 1)
    return fmt::format("layers not adjacent ({} then {})", lhi, ulo);
  const int cap = static_cast<int>(ctx.sliced.elements.size());
  const auto below = elements_on_layer(lower, ctx.sliced, lhi);
  const auto above = elements_on_layer(upper, ctx.sliced, ulo);
  if (!edge_between(ctx.dep, below, member_set(above, cap), EdgeKind::geometric))
    return "no geometric dependency between the boundary layers";
  if (collision_between(ctx.dep, lower.elements, upper.elements, cap))
    return "collision dependency between the sub-OPPs";
  if (!ctx.allow_extra_path) {
    const Polyline top = sub_top(lower, ctx.sliced);
    const Polyline bottom = sub_bottom(upper, ctx.sliced);
    double best = std::numeric_limits<double>::infinity();
    for (const Point &p : {top.front(), top.back()})
      for (const Point &q : {bottom.front(), bottom.back()})
        best = std::min(best, distance(p, q));
    if (best > ctx.connect_threshold + kEps)
      return fmt::format("endpoint gap {:.3f} exceeds the connection threshold", best);
  }
  return {};
}

template <typename Rng> void shuffle(std::vector<int> &v, Rng &rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng() % i]);
}

/// Local graph over sub-OPPs: edges come from the init graph through the owner map.
Dag local_graph(const std::vector<SubOpp> &subs, const InitGraph &init) {
  std::map<int, int> owner;
  for (std::size_t i = 0; i < subs.size(); ++i)
    for (int n : subs[i].init_nodes)
      owner[n] = static_cast<int>(i);
  Dag g(static_cast<int>(subs.size()));
  for (const auto &[node, local] : owner)
    for (int s : init.dag.successors(node))
      if (auto it = owner.find(s); it != owner.end() && it->second != local)
        g.add_edge(local, it->second, *init.dag.edge_kind(node, s));
  return g;
}

/// The unique topological order when it exists.
std::optional<std::vector<int>> unique_order(const Dag &g) {
  std::vector<int> indeg(g.size());
  for (int n = 0; n < g.size(); ++n)
    indeg[n] = static_cast<int>(g.predecessors(n).size());
  std::vector<int> ready;
  for (int n = 0; n < g.size(); ++n)
    if (indeg[n] == 0)
      ready.push_back(n);
  std::vector<int> order;
  while (ready.size() == 1) {
    const int n = ready.back();
    ready.pop_back();
    order.push_back(n);
    for (int s : g.successors(n))
      if (--indeg[s] == 0)
        ready.push_back(s);
  }
  if (static_cast<int>(order.size()) != g.size())
    return std::nullopt;
  return order;
}

bool is_stack_sequence(const std::vector<SubOpp> &subs, const MergeContext &ctx) {
  const auto order = unique_order(local_graph(subs, ctx.init));
  if (!order)
    return false;
  for (std::size_t i = 0; i < order->size(); ++i)
    if ((*order)[i] != static_cast<int>(i))
      return false;
  for (std::size_t i = 0; i + 1 < subs.size(); ++i)
    if (!stack_refusal(subs[i], subs[i + 1], ctx).empty())
      return false;
  return true;
}

template <typename Rng>
bool curve_within(std::vector<SubOpp> &subs, std::vector<char> *labels, const MergeContext &ctx, Rng &rng) {
  if (!ctx.curving_enabled)
    return false;
  const Dag g = local_graph(subs, ctx.init);
  std::vector<int> order(g.edge_count());
  const auto edges = g.edges();
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<int>(i);
  shuffle(order, rng);
  for (int i : order) {
    const Edge &e = edges[i];
    if (labels && (!(*labels)[e.from] || !(*labels)[e.to]))
      continue;
    if (e.kind != EdgeKind::geometric || has_multiple_paths(g, e.from, e.to))
      continue;
    auto merged = curving_merge(single(subs[e.to], 0), single(subs[e.from], 0), ctx);
    if (!merged)
      continue;
    const int keep = std::min(e.from, e.to);
    const int drop = std::max(e.from, e.to);
    std::vector<SubOpp> next = subs;
    next[keep] = merged->sub_opps.front();
    next.erase(next.begin() + drop);
    // Inside one patch the result must still print as a single stacked sequence.
    if (!labels && !is_stack_sequence(next, ctx))
      continue;
    subs = std::move(next);
    if (labels)
      labels->erase(labels->begin() + drop);
    return true;
  }
  return false;
}

/// Inner loop of the merging process on the edge u -> v.
std::optional<OppPatch> try_merge(const OppPatch &u, const OppPatch &v, const MergeContext &ctx,
                                  std::mt19937_64 &rng) {
  std::vector<SubOpp> subs = u.sub_opps;
  subs.insert(subs.end(), v.sub_opps.begin(), v.sub_opps.end());
  const int split = static_cast<int>(u.sub_opps.size());
  std::vector<char> labels(subs.size(), 0);
  {
    const Dag g = local_graph(subs, ctx.init);
    for (const Edge &e : g.edges())
      if ((e.from < split) != (e.to < split))
        labels[e.from] = labels[e.to] = 1;
  }
  while (curve_within(subs, &labels, ctx, rng)) {
  }

  const Dag g = local_graph(subs, ctx.init);
  const auto order = unique_order(g);
  if (!order)
    return std::nullopt;
  for (std::size_t i = 0; i + 1 < order->size(); ++i)
    if (!stack_refusal(subs[(*order)[i]], subs[(*order)[i + 1]], ctx).empty())
      return std::nullopt;
  OppPatch out;
  out.id = std::min(u.id, v.id);
  for (int i : *order)
    out.sub_opps.push_back(std::move(subs[i]));
  out.target_areas = patch_target_areas(out, ctx);
  return out;
}

} // namespace

const char *to_string(PatchType t) {
  switch (t) {
  case PatchType::I:
    return "I";
  case PatchType::II:
    return "II";
  case PatchType::III:
    return "III";
  }
  return "?";
}

PatchType OppPatch::type() const {
  bool any_curved = false, all_curved = true;
  for (const auto &s : sub_opps) {
    any_curved = any_curved || s.is_curved();
    all_curved = all_curved && s.is_curved();
  }
  if (!any_curved)
    return PatchType::I;
  return all_curved && sub_opps.size() == 1 ? PatchType::II : PatchType::III;
}

std::vector<int> OppPatch::elements() const {
  std::vector<int> out;
  for (const auto &s : sub_opps)
    out.insert(out.end(), s.elements.begin(), s.elements.end());
  return out;
}

std::vector<int> OppPatch::init_nodes() const {
  std::vector<int> out;
  for (const auto &s : sub_opps)
    out.insert(out.end(), s.init_nodes.begin(), s.init_nodes.end());
  return out;
}

int OppPatch::layer_count() const {
  int total = 0;
  for (const auto &s : sub_opps)
    total += s.curved ? s.curved->layer_count() : static_cast<int>(s.elements.size());
  return total;
}

int CurvedOppGraph::total_layers() const {
  int total = 0;
  for (const auto &p : patches)
    total += p.layer_count();
  return total;
}

SubOpp make_flat_sub_opp(const InitGraph &init, std::span<const int> init_nodes, const SlicedModel &sliced) {
  SubOpp out;
  out.init_nodes.assign(init_nodes.begin(), init_nodes.end());
  for (int n : init_nodes)
    out.elements.insert(out.elements.end(), init.chains[n].begin(), init.chains[n].end());
  std::stable_sort(out.elements.begin(), out.elements.end(), [&](int a, int b) {
    return sliced.elements[a].layer_index < sliced.elements[b].layer_index;
  });
  return out;
}

TargetFlatAreas patch_target_areas(const OppPatch &patch, const MergeContext &ctx) {
  TargetFlatAreas out;
  if (patch.sub_opps.empty())
    return out;
  const auto fallback = [&] {
    out.top = {sub_top(patch.sub_opps.back(), ctx.sliced)};
    out.bottom = {sub_bottom(patch.sub_opps.front(), ctx.sliced)};
    return out;
  };
  if (patch.sub_opps.size() == 1)
    return fallback();
  const auto all = patch.elements();
  auto region = column_region(ctx.sliced, all, ctx.column_spacing());
  if (!region)
    return fallback();
  const int cap = static_cast<int>(ctx.sliced.elements.size());
  for (const SubOpp &s : patch.sub_opps) {
    const NodeSet owner = member_set(s.elements, cap);
    for (auto &piece : on_envelope(sub_top(s, ctx.sliced), owner, *region.value, true))
      out.top.push_back(std::move(piece));
    for (auto &piece : on_envelope(sub_bottom(s, ctx.sliced), owner, *region.value, false))
      out.bottom.push_back(std::move(piece));
  }
  return out;
}

Outcome<OppPatch> stacking_merge(const OppPatch &a, const OppPatch &b, const MergeContext &ctx) {
  if (a.sub_opps.empty() || b.sub_opps.empty())
    return Outcome<OppPatch>::refuse("empty patch");
  const int cap = static_cast<int>(ctx.sliced.elements.size());
  if (collision_between(ctx.dep, a.elements(), b.elements(), cap))
    return Outcome<OppPatch>::refuse("collision dependency between the patches");
  if (auto why = stack_refusal(b.sub_opps.back(), a.sub_opps.front(), ctx); !why.empty())
    return Outcome<OppPatch>::refuse(why);
  OppPatch out;
  out.id = std::min(a.id, b.id);
  out.sub_opps = b.sub_opps;
  out.sub_opps.insert(out.sub_opps.end(), a.sub_opps.begin(), a.sub_opps.end());
  out.target_areas = patch_target_areas(out, ctx);
  return Outcome<OppPatch>::ok(std::move(out));
}

Outcome<TargetFlatAreas> combine_target_areas(const OppPatch &a, const OppPatch &b, const MergeContext &ctx) {
  auto c = combine_impl(a, b, ctx);
  if (!c)
    return Outcome<TargetFlatAreas>::refuse(c.reason);
  return Outcome<TargetFlatAreas>::ok(std::move(c.value->areas));
}

Outcome<OppPatch> curving_merge(const OppPatch &a, const OppPatch &b, const MergeContext &ctx) {
  auto c = combine_impl(a, b, ctx);
  if (!c)
    return Outcome<OppPatch>::refuse(c.reason);
  auto stack = curved_layer_feasibility(c->region, c->areas, ctx.limits);
  if (!stack)
    return Outcome<OppPatch>::refuse(stack.reason);
  SubOpp merged;
  merged.init_nodes = b.init_nodes();
  const auto an = a.init_nodes();
  merged.init_nodes.insert(merged.init_nodes.end(), an.begin(), an.end());
  merged.elements = union_elements(a, b);
  std::stable_sort(merged.elements.begin(), merged.elements.end(), [&](int x, int y) {
    const auto &ex = ctx.sliced.elements[x];
    const auto &ey = ctx.sliced.elements[y];
    return ex.layer_index != ey.layer_index ? ex.layer_index < ey.layer_index : ex.min_x() < ey.min_x();
  });
  merged.curved = std::move(*stack.value);
  OppPatch out;
  out.id = std::min(a.id, b.id);
  out.sub_opps = {std::move(merged)};
  out.target_areas = std::move(c.value->areas);
  return Outcome<OppPatch>::ok(std::move(out));
}

void rebuild_edges(CurvedOppGraph &g, const InitGraph &init) {
  std::vector<int> owner(init.dag.size(), -1);
  for (int p = 0; p < g.size(); ++p) {
    g.patches[p].id = p;
    for (int n : g.patches[p].init_nodes())
      owner[n] = p;
  }
  g.dag = Dag(g.size());
  for (const Edge &e : init.dag.edges())
    if (owner[e.from] >= 0 && owner[e.to] >= 0 && owner[e.from] != owner[e.to])
      g.dag.add_edge(owner[e.from], owner[e.to], e.kind);
}

CurvedOppGraph curved_graph_from_flat(const FlatOppGraph &flat, const MergeContext &ctx) {
  std::vector<int> free_chain;
  if (ctx.collision_free_init)
    free_chain = ctx.collision_free_init->owner;
  CurvedOppGraph g;
  for (const auto &path : flat.paths) {
    OppPatch patch;
    for (int node : path) {
      SubOpp sub = make_flat_sub_opp(ctx.init, std::span<const int>(&node, 1), ctx.sliced);
      if (!patch.sub_opps.empty() && !free_chain.empty()) {
        SubOpp &prev = patch.sub_opps.back();
        const int chain = free_chain[prev.elements.front()];
        const auto same = [&](const SubOpp &s) {
          return std::all_of(s.elements.begin(), s.elements.end(), [&](int e) { return free_chain[e] == chain; });
        };
        if (same(prev) && same(sub)) {
          prev.init_nodes.push_back(node);
          prev.elements.insert(prev.elements.end(), sub.elements.begin(), sub.elements.end());
          continue;
        }
      }
      patch.sub_opps.push_back(std::move(sub));
    }
    g.patches.push_back(std::move(patch));
  }
  rebuild_edges(g, ctx.init);
  for (auto &p : g.patches)
    p.target_areas = patch_target_areas(p, ctx);
  return g;
}

CurvedOppGraph pairwise_merge(const CurvedOppGraph &input, const MergeContext &ctx, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CurvedOppGraph g = input;

  // Initial merging: curve consecutive sub-OPPs inside each patch.
  for (auto &patch : g.patches) {
    bool changed = false;
    while (patch.sub_opps.size() > 1 && curve_within(patch.sub_opps, nullptr, ctx, rng))
      changed = true;
    if (changed)
      patch.target_areas = patch_target_areas(patch, ctx);
  }

  for (;;) {
    const auto edges = g.dag.edges();
    std::vector<int> order(edges.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<int>(i);
    shuffle(order, rng);
    bool merged = false;
    for (int i : order) {
      const Edge &e = edges[i];
      if (has_multiple_paths(g.dag, e.from, e.to))
        continue;
      auto patch = try_merge(g.patches[e.from], g.patches[e.to], ctx, rng);
      if (!patch)
        continue;
      const int keep = std::min(e.from, e.to);
      const int drop = std::max(e.from, e.to);
      g.patches[keep] = std::move(*patch);
      g.patches.erase(g.patches.begin() + drop);
      rebuild_edges(g, ctx.init);
      merged = true;
      break;
    }
    if (!merged)
      break;
  }
  return g;
}

const CurvedOppGraph &select_best(std::span<const CurvedOppGraph> graphs) {
  if (graphs.empty())
    throw Error("select_best needs at least one graph");
  std::size_t best = 0;
  for (std::size_t i = 1; i < graphs.size(); ++i) {
    const auto &a = graphs[i];
    const auto &b = graphs[best];
    if (a.size() < b.size() || (a.size() == b.size() && a.total_layers() < b.total_layers()))
      best = i;
  }
  return graphs[best];
}

} // namespace acap
