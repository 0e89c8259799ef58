#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "acap/curved_merge.hpp"
#include "fixtures.hpp"

using namespace acap;

namespace {

struct Setup {
  SlicedModel sliced;
  DepGraph dep;
  InitGraph init;
  StackLimits limits;

  MergeContext ctx() const { return MergeContext{sliced, dep, init, limits}; }
};

/// With `cuts`, a one-element-per-layer model is split into chains starting at those layers.
std::unique_ptr<Setup> setup(const SurfaceModel &m, std::vector<int> cuts = {}) {
  auto s = std::make_unique<Setup>();
  s->sliced = slice_model(m, 1.0, 6.0);
  s->dep = build_dep_graph(s->sliced, 6.0);
  s->limits.tan_max = compute_slope_limits(NozzleModel{}, m.xy_extent()).max_tan();
  if (cuts.empty()) {
    s->init = build_init_graph(s->dep, s->sliced.elements);
    return s;
  }
  cuts.insert(cuts.begin(), 0);
  cuts.push_back(static_cast<int>(s->sliced.layers.size()));
  s->init.owner.assign(s->sliced.elements.size(), -1);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    std::vector<int> chain;
    for (int l = cuts[c]; l < cuts[c + 1]; ++l) {
      REQUIRE(s->sliced.layers[l].size() == 1);
      chain.push_back(s->sliced.layers[l][0]);
      s->init.owner[chain.back()] = static_cast<int>(c);
    }
    s->init.chains.push_back(chain);
  }
  s->init.dag = Dag(static_cast<int>(s->init.chains.size()));
  for (const auto &e : s->dep.edges())
    if (s->init.owner[e.from] != s->init.owner[e.to])
      s->init.dag.add_edge(s->init.owner[e.from], s->init.owner[e.to], e.kind);
  return s;
}

OppPatch patch(const Setup &s, std::vector<int> nodes, int id = 0) {
  OppPatch p;
  p.id = id;
  for (int n : nodes)
    p.sub_opps.push_back(make_flat_sub_opp(s.init, std::span<const int>(&n, 1), s.sliced));
  p.target_areas = patch_target_areas(p, s.ctx());
  return p;
}

ColumnRegion band(std::vector<double> bottom, std::vector<double> top, double spacing) {
  ColumnRegion r;
  for (std::size_t c = 0; c < top.size(); ++c)
    r.x.push_back(c * spacing);
  r.bottom = r.raw_bottom = std::move(bottom);
  r.top = r.raw_top = std::move(top);
  r.bottom_element.assign(r.x.size(), 0);
  r.top_element.assign(r.x.size(), 0);
  return r;
}

/// Independent replay of the stack constraints.
int violations(const CurvedLayerStack &st, const StackLimits &lim) {
  int bad = 0;
  for (int k = 1; k < st.layer_count(); ++k)
    for (int c = 0; c < st.column_count(); ++c) {
      const double gap = st.heights[k][c] - st.heights[k - 1][c];
      bad += gap < lim.t_min - 1e-9 || gap > lim.t_max + 1e-9;
    }
  for (int k = 0; k < st.layer_count(); ++k)
    for (int c = 1; c < st.column_count(); ++c) {
      const double slope = std::abs(st.heights[k][c] - st.heights[k][c - 1]) / (st.columns[c] - st.columns[c - 1]);
      bad += slope > lim.tan_max + 1e-6;
    }
  return bad;
}

bool flat(const Polyline &p) {
  for (const auto &q : p)
    if (std::abs(q.z - p.front().z) > 1e-9)
      return false;
  return true;
}

} // namespace

TEST_CASE("curved layer feasibility") {
  const StackLimits lim;
  SUBCASE("uniform band recovers flat layers") {
    const auto r = band(std::vector<double>(9, 0.0), std::vector<double>(9, 10.0), 1.5);
    const auto st = curved_layer_feasibility(r, {}, lim);
    REQUIRE(st);
    CHECK(st->layer_count() == 5);
    for (int k = 0; k < st->layer_count(); ++k)
      CHECK(flat(st->layer_polyline(k)));
    CHECK(violations(*st, lim) == 0);
    CHECK(audit_stack(*st, lim).empty());
  }
  SUBCASE("10mm and 1mm columns share no layer count") {
    const auto r = band({0, 0}, {10, 1}, 1.5);
    bool any = false;
    for (int gaps = 1; gaps <= 100; ++gaps)
      any = any || (10.0 / gaps <= lim.t_max && 1.0 / gaps >= lim.t_min);
    CHECK_FALSE(any);
    const auto st = curved_layer_feasibility(r, {}, lim);
    CHECK_FALSE(st);
    CHECK(st.reason.find("layer count") != std::string::npos);
  }
  SUBCASE("gentle wedge") {
    std::vector<double> bottom, top;
    for (int c = 0; c <= 26; ++c) {
      bottom.push_back(0.0);
      top.push_back(10.0 - 2.0 * c / 26.0);
    }
    const auto r = band(bottom, top, 40.0 / 26.0);
    const auto st = curved_layer_feasibility(r, {}, lim);
    REQUIRE(st);
    CHECK(st->layer_count() - 1 >= 4);
    CHECK(st->layer_count() - 1 <= 16);
    CHECK(violations(*st, lim) == 0);
    CHECK(audit_stack(*st, lim).empty());
    // Smallest feasible count: one fewer gap breaks t_max somewhere.
    CHECK(10.0 / (st->layer_count() - 2) > lim.t_max);
  }
  SUBCASE("steep boundary is refused") {
    const auto r = band({0, 0, 0}, {10, 4, 10}, 1.5);
    CHECK_FALSE(curved_layer_feasibility(r, {}, lim));
  }
  SUBCASE("zero height gives one layer") {
    const auto r = band({2, 2}, {2, 2}, 1.5);
    const auto st = curved_layer_feasibility(r, {}, lim);
    REQUIRE(st);
    CHECK(st->layer_count() == 1);
    CHECK(st->thickness(0, 0) == doctest::Approx(lim.t_min));
  }
}

TEST_CASE("stack audit and text format") {
  const StackLimits lim;
  CurvedLayerStack st;
  st.columns = {0, 1, 2};
  st.heights = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2.2}};
  CHECK(audit_stack(st, lim).empty());
  std::ostringstream out;
  write_stack(out, st);
  std::istringstream in(out.str());
  const auto back = read_stack(in);
  CHECK(back.columns == st.columns);
  CHECK(back.heights == st.heights);

  st.heights[2][2] = 5.0;
  CHECK_FALSE(audit_stack(st, lim).empty());
  st.heights[2][2] = 1.1;
  CHECK_FALSE(audit_stack(st, lim).empty());
}

TEST_CASE("column region") {
  const auto s = setup(fixtures::rectangle(60, 40));
  std::vector<int> all(s->sliced.elements.size());
  for (std::size_t i = 0; i < all.size(); ++i)
    all[i] = static_cast<int>(i);
  const auto r = column_region(s->sliced, all, 1.5);
  REQUIRE(r);
  CHECK(r->x.front() == doctest::Approx(0.0));
  CHECK(r->x.back() == doctest::Approx(60.0));
  for (std::size_t c = 0; c < r->x.size(); ++c) {
    CHECK(r->top[c] == doctest::Approx(39.5));
    CHECK(r->bottom[c] == doctest::Approx(0.5));
  }
  const auto towers = setup(fixtures::two_towers(30, 10));
  std::vector<int> both(towers->sliced.elements.size());
  for (std::size_t i = 0; i < both.size(); ++i)
    both[i] = static_cast<int>(i);
  CHECK_FALSE(column_region(towers->sliced, both, 1.5));
}

TEST_CASE("stacking merge") {
  SUBCASE("stacked rectangles") {
    const auto s = setup(fixtures::rectangle(60, 40), {20});
    const auto m = stacking_merge(patch(*s, {1}, 1), patch(*s, {0}, 0), s->ctx());
    REQUIRE(m);
    CHECK(m->sub_opps.size() == 2);
    CHECK(m->sub_opps[0].init_nodes == std::vector<int>{0});
    CHECK(m->type() == PatchType::I);
    CHECK(m->id == 0);
  }
  SUBCASE("a skipped layer is refused") {
    const auto s = setup(fixtures::rectangle(60, 40), {20, 21});
    CHECK_FALSE(stacking_merge(patch(*s, {2}), patch(*s, {0}), s->ctx()));
  }
  SUBCASE("steep shoulder stacks but does not curve") {
    const auto s = setup(fixtures::steep_y());
    REQUIRE(s->init.dag.size() == 3);
    int stem = -1, arm = -1;
    for (int n = 0; n < 3; ++n)
      (s->init.dag.predecessors(n).empty() ? stem : arm) = n;
    const auto ctx = s->ctx();
    CHECK(stacking_merge(patch(*s, {arm}, 1), patch(*s, {stem}), ctx));
    CHECK_FALSE(curving_merge(patch(*s, {arm}, 1), patch(*s, {stem}), ctx));
  }
}

TEST_CASE("target areas") {
  SUBCASE("a exactly covering b") {
    const auto s = setup(fixtures::rectangle(60, 40), {20});
    const auto a = combine_target_areas(patch(*s, {1}), patch(*s, {0}), s->ctx());
    REQUIRE(a);
    REQUIRE(a->top.size() == 1);
    REQUIRE(a->bottom.size() == 1);
    CHECK(a->obliques.empty());
    CHECK(flat(a->top[0]));
    CHECK(a->top[0].front().x == doctest::Approx(0.0));
    CHECK(a->top[0].back().x == doctest::Approx(60.0));
    CHECK(a->top[0].front().z > a->bottom[0].front().z + 30.0);
  }
  SUBCASE("half cover with a gentle shoulder") {
    const auto m = fixtures::profile("shoulder", {{0, 0}, {100, 0}, {100, 20}, {90, 20}, {50, 40}, {0, 40}});
    const auto s = setup(m, {20});
    const auto ctx = s->ctx();
    const auto a = combine_target_areas(patch(*s, {1}), patch(*s, {0}), ctx);
    REQUIRE(a);
    REQUIRE(a->top.size() == 2);
    REQUIRE(a->obliques.size() == 1);
    // Top of a over the left half, the rest of b's top on the right.
    CHECK(a->top[0].back().x < 60.0);
    CHECK(a->top[1].front().x > 85.0);
    CHECK(a->top[1].back().x == doctest::Approx(100.0));
    const auto &ob = a->obliques[0];
    CHECK(ob.front().x <= a->top[0].back().x + 1e-9);
    CHECK(ob.back().x >= a->top[1].front().x - 1e-9);
    for (std::size_t i = 1; i < ob.size(); ++i)
      CHECK(std::abs(ob[i].z - ob[i - 1].z) <= s->limits.tan_max * (ob[i].x - ob[i - 1].x) + 1e-6);
    const auto merged = curving_merge(patch(*s, {1}), patch(*s, {0}), ctx);
    REQUIRE(merged);
    CHECK(merged->type() == PatchType::II);
    CHECK(violations(*merged->sub_opps[0].curved, s->limits) == 0);
  }
  SUBCASE("contour patches are refused") {
    const auto s = setup(fixtures::cylinder_mesh(20, 30, 48), {15});
    const auto r = combine_target_areas(patch(*s, {1}), patch(*s, {0}), s->ctx());
    CHECK_FALSE(r);
  }
  SUBCASE("curving disabled") {
    const auto s = setup(fixtures::rectangle(60, 40), {20});
    auto ctx = s->ctx();
    ctx.curving_enabled = false;
    CHECK_FALSE(curving_merge(patch(*s, {1}), patch(*s, {0}), ctx));
  }
}

TEST_CASE("curving refuses thickness violations") {
  // A tall block tapering to a 2mm sliver: no layer count fits both ends.
  const auto m = fixtures::profile("sliver", {{0, 0}, {100, 0}, {100, 2}, {20, 40}, {0, 40}});
  const auto s = setup(m, {2});
  const auto r = curving_merge(patch(*s, {1}), patch(*s, {0}), s->ctx());
  CHECK_FALSE(r);
  CHECK(r.reason.find("layer count") != std::string::npos);
}

TEST_CASE("pairwise merge") {
  auto run = [](const SurfaceModel &m, std::uint64_t seed = 0) {
    auto s = setup(m);
    const auto ctx = s->ctx();
    const auto covers = beam_search_path_covers(s->init.dag);
    const auto flat = curved_graph_from_flat(covers.front(), ctx);
    auto merged = pairwise_merge(flat, ctx, seed);
    CHECK(merged.size() <= flat.size());
    CHECK(merged.dag.acyclic());
    for (const auto &p : merged.patches)
      for (const auto &sub : p.sub_opps)
        if (sub.curved)
          CHECK(violations(*sub.curved, s->limits) == 0);
    return std::make_pair(flat.size(), merged);
  };
  SUBCASE("gentle Y curves into one patch") {
    const auto [before, g] = run(fixtures::gentle_y());
    CHECK(before == 2);
    REQUIRE(g.size() == 1);
    CHECK(g.patches[0].type() == PatchType::II);
  }
  SUBCASE("steep Y stays apart") {
    const auto [before, g] = run(fixtures::steep_y());
    CHECK(before == 2);
    CHECK(g.size() == 2);
  }
  SUBCASE("towers under a shared dome") {
    const auto [before, g] = run(fixtures::arch());
    CHECK(before == 2);
    REQUIRE(g.size() == 1);
    CHECK(g.patches[0].type() == PatchType::II);
  }
  SUBCASE("distant towers are a fixpoint") {
    const auto [before, g] = run(fixtures::two_towers(30, 20));
    CHECK(before == 2);
    CHECK(g.size() == 2);
  }
  SUBCASE("fixed seed is deterministic") {
    const auto a = run(fixtures::comb(), 4).second;
    const auto b = run(fixtures::comb(), 4).second;
    REQUIRE(a.size() == b.size());
    for (int p = 0; p < a.size(); ++p)
      CHECK(a.patches[p].elements() == b.patches[p].elements());
    CHECK(a.dag == b.dag);
  }
}

TEST_CASE("select best") {
  auto graph = [](int patches, int layers) {
    CurvedOppGraph g;
    g.patches.resize(patches);
    SubOpp sub;
    sub.elements.assign(layers, 0);
    g.patches[0].sub_opps.push_back(sub);
    return g;
  };
  const std::vector<CurvedOppGraph> sizes{graph(3, 5), graph(2, 9)};
  CHECK(&select_best(sizes) == &sizes[1]);
  const std::vector<CurvedOppGraph> layers{graph(2, 9), graph(2, 4), graph(2, 4)};
  CHECK(&select_best(layers) == &layers[1]);
}
