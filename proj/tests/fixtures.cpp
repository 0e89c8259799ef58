#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace fixtures {

using namespace acap;

SurfaceModel profile(const std::string &name, const std::vector<std::pair<double, double>> &outer) {
  SurfaceModel m;
  m.mode = ModelMode::profile2d;
  m.name = name;
  ProfileLoop loop;
  for (auto [x, z] : outer)
    loop.vertices.push_back({x, 0.0, z});
  m.profile.push_back(loop);
  return m;
}

SurfaceModel rectangle(double width, double height) {
  return profile("rectangle", {{0, 0}, {width, 0}, {width, height}, {0, height}});
}

SurfaceModel gentle_y() {
  return profile("gentle_y", {{0, 0}, {120, 0}, {120, 40}, {110, 40}, {70, 20}, {50, 20}, {10, 40}, {0, 40}});
}

SurfaceModel steep_y() {
  return profile("steep_y", {{0, 0}, {120, 0}, {120, 40}, {75, 40}, {70, 20}, {50, 20}, {45, 40}, {0, 40}});
}

SurfaceModel arch() {
  return profile("arch", {{0, 0}, {10, 0}, {50, 20}, {70, 20}, {110, 0}, {120, 0}, {120, 40}, {0, 40}});
}

SurfaceModel t_shape() {
  return profile("t_shape", {{20, 0}, {40, 0}, {40, 20}, {60, 20}, {60, 26}, {0, 26}, {0, 20}, {20, 20}});
}

SurfaceModel overhang_above_material() {
  // A C shape: the upper arm overhangs the lower one with an empty slot between.
  return profile("overhang", {{0, 0}, {60, 0}, {60, 10}, {10, 10}, {10, 20}, {60, 20}, {60, 30}, {0, 30}});
}

SurfaceModel two_towers(double gap, double height) {
  SurfaceModel m = profile("two_towers", {{0, 0}, {20, 0}, {20, height}, {0, height}});
  ProfileLoop right;
  for (auto [x, z] : std::vector<std::pair<double, double>>{
           {20 + gap, 0}, {40 + gap, 0}, {40 + gap, height}, {20 + gap, height}})
    right.vertices.push_back({x, 0.0, z});
  m.profile.push_back(right);
  return m;
}

SurfaceModel trident() {
  return profile("trident", {{0, 0},   {160, 0},  {160, 40}, {150, 40}, {120, 25}, {100, 25},
                             {90, 40}, {70, 40},  {60, 25},  {40, 25},  {10, 40},  {0, 40}});
}

SurfaceModel scaled(SurfaceModel m, double factor) {
  for (auto &loop : m.profile)
    for (auto &p : loop.vertices)
      p = p * factor;
  for (auto &p : m.mesh.vertices)
    p = p * factor;
  return m;
}

SurfaceModel small_y() {
  auto m = scaled(gentle_y(), 0.1);
  m.name = "small_y";
  return m;
}

SurfaceModel comb() {
  return profile("comb", {{0, 0}, {90, 0}, {90, 100}, {80, 100}, {80, 20}, {50, 20}, {50, 100}, {40, 100},
                          {40, 20}, {10, 20}, {10, 100}, {0, 100}});
}

namespace {

SurfaceModel tube(const std::string &name, double r0, double r1, double height, int segments) {
  SurfaceModel m;
  m.mode = ModelMode::mesh3d;
  m.name = name;
  for (int ring = 0; ring < 2; ++ring)
    for (int i = 0; i < segments; ++i) {
      const double a = 2.0 * std::numbers::pi * i / segments;
      const double r = ring ? r1 : r0;
      m.mesh.vertices.push_back({r * std::cos(a), r * std::sin(a), ring ? height : 0.0});
    }
  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    m.mesh.triangles.push_back({i, j, segments + j});
    m.mesh.triangles.push_back({i, segments + j, segments + i});
  }
  return m;
}

} // namespace

SurfaceModel cylinder_mesh(double radius, double height, int segments) {
  return tube("cylinder", radius, radius, height, segments);
}

SurfaceModel cone_mesh(double r_bottom, double r_top, double height, int segments) {
  return tube("cone", r_bottom, r_top, height, segments);
}

std::vector<SurfaceModel> profile_corpus() {
  return {rectangle(60, 40), gentle_y(), steep_y(), arch(), t_shape(), two_towers(30, 30), trident(), small_y(),
          comb()};
}

Dag random_dag(int n, double density, std::mt19937_64 &rng, double collision_fraction) {
  std::vector<int> label(n);
  for (int i = 0; i < n; ++i)
    label[i] = i;
  std::shuffle(label.begin(), label.end(), rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dag g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (u(rng) < density)
        g.add_edge(label[i], label[j], u(rng) < collision_fraction ? EdgeKind::collision : EdgeKind::geometric);
  return g;
}

Dag brute_force_reduction(const Dag &g) {
  const int n = g.size();
  auto reachable_without = [&](int s, int t, const Edge &skip) {
    std::vector<bool> seen(n, false);
    std::vector<int> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : g.successors(u)) {
        if (u == skip.from && v == skip.to)
          continue;
        if (v == t)
          return true;
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    return false;
  };
  Dag out(n);
  for (const auto &e : g.edges())
    if (!reachable_without(e.from, e.to, e))
      out.add_edge(e.from, e.to, e.kind);
  return out;
}

double brute_force_zigzag(const std::vector<Polyline> &layers) {
  const int L = static_cast<int>(layers.size());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << L); ++mask) {
    double cost = 0.0;
    for (int i = 1; i < L; ++i) {
      const bool prev_rev = mask >> (i - 1) & 1;
      const bool rev = mask >> i & 1;
      const Point &exit = prev_rev ? layers[i - 1].front() : layers[i - 1].back();
      const Point &entry = rev ? layers[i].back() : layers[i].front();
      cost += distance(exit, entry);
    }
    best = std::min(best, cost);
  }
  return best;
}

double brute_force_spiral(const std::vector<Polyline> &samples) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(samples.size(), 0);
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double cost) {
    if (i == samples.size()) {
      best = std::min(best, cost);
      return;
    }
    for (std::size_t j = 0; j < samples[i].size(); ++j) {
      pick[i] = static_cast<int>(j);
      rec(i + 1, i == 0 ? 0.0 : cost + distance(samples[i - 1][pick[i - 1]], samples[i][j]));
    }
  };
  rec(0, 0.0);
  return best;
}

Polyline circle(double radius, double z, int m, double phase) {
  Polyline out;
  for (int k = 0; k < m; ++k) {
    const double a = phase + 2.0 * std::numbers::pi * k / m;
    out.push_back({radius * std::cos(a), radius * std::sin(a), z});
  }
  return out;
}

} // namespace fixtures
