#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "acap/geometry.hpp"
#include "acap/model_io.hpp"
#include "fixtures.hpp"

using namespace acap;

namespace {

/// Crossings of the horizontal line z with the polygon boundary, halved.
int interval_count(const SurfaceModel &m, double z) {
  int crossings = 0;
  for (const auto &loop : m.profile)
    for (std::size_t i = 0; i < loop.vertices.size(); ++i) {
      const Point &a = loop.vertices[i];
      const Point &b = loop.vertices[(i + 1) % loop.vertices.size()];
      if ((a.z < z) != (b.z < z))
        ++crossings;
    }
  return crossings / 2;
}

Polyline densify(const Polyline &pts, bool closed, int per_edge) {
  Polyline out;
  const std::size_t n = closed ? pts.size() : pts.size() - 1;
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < per_edge; ++k)
      out.push_back(lerp(pts[i], pts[(i + 1) % pts.size()], static_cast<double>(k) / per_edge));
  if (!closed)
    out.push_back(pts.back());
  return out;
}

LayerElement segment(double x0, double x1, double z, int layer = 0) {
  LayerElement e;
  e.layer_index = layer;
  e.z = z;
  e.points = {{x0, 0, z}, {x1, 0, z}};
  return e;
}

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }

} // namespace

TEST_CASE("slicing a rectangle gives one segment per layer at mid-plane heights") {
  const auto s = slice_model(fixtures::rectangle(60, 40), 1.0);
  REQUIRE(s.layers.size() == 40);
  for (int i = 0; i < 40; ++i) {
    REQUIRE(s.layers[i].size() == 1);
    const auto &e = s.elements[s.layers[i][0]];
    CHECK(e.kind == ElementKind::segment);
    CHECK(e.z == doctest::Approx(i + 0.5));
    CHECK(e.min_x() == doctest::Approx(0.0));
    CHECK(e.max_x() == doctest::Approx(60.0));
  }
}

TEST_CASE("Y profile splits into two segments above the crotch") {
  const auto m = fixtures::gentle_y();
  const auto s = slice_model(m, 1.0);
  REQUIRE(s.layers.size() == 40);
  for (int i = 0; i < 40; ++i)
    CHECK(static_cast<int>(s.layers[i].size()) == interval_count(m, s.layer_z(i)));
  CHECK(s.layers[10].size() == 1);
  CHECK(s.layers[30].size() == 2);
}

TEST_CASE("cylinder mesh gives one contour per layer") {
  const auto s = slice_model(fixtures::cylinder_mesh(20, 30, 48), 1.0);
  REQUIRE(s.layers.size() == 30);
  for (const auto &layer : s.layers) {
    REQUIRE(layer.size() == 1);
    CHECK(s.elements[layer[0]].kind == ElementKind::contour);
  }
}

TEST_CASE("ids are unique and layers partition the elements") {
  const auto s = slice_model(fixtures::comb(), 1.0);
  std::vector<int> seen(s.elements.size(), 0);
  for (std::size_t l = 0; l < s.layers.size(); ++l)
    for (int id : s.layers[l]) {
      ++seen[id];
      CHECK(s.elements[id].id == id);
      CHECK(s.elements[id].layer_index == static_cast<int>(l));
    }
  for (int c : seen)
    CHECK(c == 1);
}

TEST_CASE("short elements are kept and flagged degenerate") {
  // A thin spike on top of a block.
  const auto m = fixtures::profile("spike", {{0, 0}, {40, 0}, {40, 10}, {21, 10}, {20.5, 14}, {20, 10}, {0, 10}});
  const auto s = slice_model(m, 1.0, 6.0);
  bool flagged = false;
  for (const auto &e : s.elements)
    if (e.z > 10.0) {
      CHECK(e.degenerate);
      flagged = true;
    }
  CHECK(flagged);
}

TEST_CASE("slice area approximates convex profile area") {
  const auto m = fixtures::profile("trapezoid", {{0, 0}, {80, 0}, {60, 30}, {15, 30}});
  const double area = 0.5 * (80 + 45) * 30;
  const auto s = slice_model(m, 1.0);
  double sum = 0.0;
  for (const auto &e : s.elements)
    sum += e.length() * s.thickness;
  CHECK(std::abs(sum - area) / area < 0.02);
}

TEST_CASE("empty model slices to nothing") {
  SurfaceModel m;
  CHECK(slice_model(m, 1.0).layers.empty());
}

TEST_CASE("element distance") {
  SUBCASE("stacked identical segments") { CHECK(element_distance(segment(0, 10, 0), segment(0, 10, 1)) == 0.0); }
  SUBCASE("axis aligned gap") {
    CHECK(element_distance(segment(0, 10, 0), segment(13, 20, 4)) == doctest::Approx(3.0));
  }
  SUBCASE("concentric circles against dense sampling") {
    LayerElement a, b;
    a.kind = b.kind = ElementKind::contour;
    a.points = fixtures::circle(10, 0, 256);
    b.points = fixtures::circle(12, 1, 256);
    const double exact = element_distance(a, b);
    CHECK(exact == doctest::Approx(2.0).epsilon(1e-3));
    const auto da = densify(a.points, true, 8);
    const auto db = densify(b.points, true, 8);
    double sampled = 1e9;
    for (const auto &p : da)
      for (const auto &q : db)
        sampled = std::min(sampled, horizontal_distance(p, q));
    CHECK(exact <= sampled + 1e-12);
    CHECK(sampled - exact < 1e-3);
  }
  SUBCASE("symmetric") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-20, 20);
    for (int k = 0; k < 50; ++k) {
      LayerElement a = segment(u(rng), u(rng), 0), b = segment(u(rng), u(rng), 1);
      a.points.push_back({u(rng), u(rng), 0});
      CHECK(element_distance(a, b) == doctest::Approx(element_distance(b, a)));
    }
  }
}

TEST_CASE("slope limits") {
  NozzleModel ceramic;
  ceramic.outlet_radius = 2.6;
  ceramic.reference_thickness = 1.5;
  const auto c = compute_slope_limits(ceramic, 1.0);
  CHECK(c.outlet_deg == doctest::Approx(29.98).epsilon(1e-3));
  CHECK(std::abs(c.max_deg - 30.0) < 0.5);
  CHECK(c.max_deg == doctest::Approx(std::min({c.nozzle_deg, c.object_deg, c.outlet_deg})));

  NozzleModel fdm;
  fdm.outlet_radius = 0.5;
  fdm.reference_thickness = 0.35;
  fdm.length = 8.0;
  const auto f = compute_slope_limits(fdm, 1.0);
  CHECK(f.outlet_deg == doctest::Approx(34.99).epsilon(1e-3));
  CHECK(std::abs(f.max_deg - 35.0) < 0.5);

  CHECK(compute_slope_limits(ceramic, 0.0).object_deg == doctest::Approx(90.0));
  CHECK(compute_slope_limits(ceramic, 120.0).object_deg == doctest::Approx(deg(std::atan(90.0 / 120.0))));

  NozzleModel thin = ceramic;
  thin.reference_thickness = 1e-9;
  CHECK(compute_slope_limits(thin, 1.0).max_deg < 1e-6);

  double prev_t = 0.0;
  for (double t = 0.1; t < 5.0; t += 0.1) {
    NozzleModel n = ceramic;
    n.reference_thickness = t;
    // The outlet angle grows with t.
    const double d = compute_slope_limits(n, 50.0).max_deg;
    CHECK(d >= prev_t - 1e-12);
    prev_t = d;
  }
  double prev_e = 90.0;
  for (double e = 0.0; e < 500.0; e += 10.0) {
    const double d = compute_slope_limits(ceramic, e).max_deg;
    CHECK(d <= prev_e + 1e-12);
    prev_e = d;
  }
}

namespace {

/// Dense point-in-swept-solid check: samples tip positions along `printing` and points of
/// the ribbon around `printed`.
bool sampled_collision(const LayerElement &printing, const LayerElement &printed, const NozzleModel &nozzle,
                       const RibbonModel &ribbon) {
  if (printed.layer_index <= printing.layer_index + 1)
    return false;
  const auto tips = densify(printing.points, printing.closed(), 40);
  const auto centre = densify(printed.points, printed.closed(), 40);
  for (const auto &q : centre)
    for (double dx = -ribbon.half_width; dx <= ribbon.half_width + 1e-9; dx += ribbon.half_width / 6)
      for (double dy = -ribbon.half_width; dy <= ribbon.half_width + 1e-9; dy += ribbon.half_width / 6) {
        if (dx * dx + dy * dy > ribbon.half_width * ribbon.half_width + 1e-9)
          continue;
        for (double dz = -0.5; dz <= 0.5; dz += 0.25) {
          const Point r{q.x + dx, q.y + dy, q.z + dz * ribbon.thickness};
          for (const auto &tip : tips) {
            const double h = r.z - tip.z;
            if (h >= 0.0 && horizontal_distance(tip, r) < nozzle.radius_at(h))
              return true;
          }
        }
      }
  return false;
}

NozzleModel short_nozzle() {
  NozzleModel n;
  n.length = 8.0;
  n.outlet_radius = 0.5;
  n.reference_thickness = 0.35;
  return n;
}

} // namespace

TEST_CASE("nozzle collision predicate") {
  const RibbonModel ribbon;
  const NozzleModel nozzle = short_nozzle();
  SUBCASE("lower geometry is exempt") {
    CHECK_FALSE(nozzle_collides(segment(0, 10, 5.5, 5), segment(0, 10, 2.5, 2), nozzle, ribbon));
    CHECK_FALSE(nozzle_collides(segment(0, 10, 5.5, 5), segment(0, 10, 6.5, 6), nozzle, ribbon));
  }
  SUBCASE("tall wall 1mm away") {
    const auto printing = segment(0, 10, 5.0, 5);
    const auto wall = segment(11, 20, 19.5, 19);
    CHECK(nozzle_collides(printing, wall, nozzle, ribbon));
    CHECK(sampled_collision(printing, wall, nozzle, ribbon));
  }
  SUBCASE("far wall") {
    CHECK_FALSE(nozzle_collides(segment(0, 10, 5.0, 5), segment(510, 520, 19.5, 19), nozzle, ribbon));
  }
  SUBCASE("agrees with dense sampling away from the boundary") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> x(0, 30), len(1, 10);
    std::uniform_int_distribution<int> layer(0, 30);
    int compared = 0;
    for (int k = 0; k < 200; ++k) {
      const double a0 = x(rng), b0 = x(rng);
      const int la = layer(rng), lb = layer(rng);
      const auto a = segment(a0, a0 + len(rng), la + 0.5, la);
      const auto b = segment(b0 + 20, b0 + 20 + len(rng), lb + 0.5, lb);
      const double dz = b.z + 0.5 - a.z;
      const double margin = element_distance(a, b) - ribbon.half_width - nozzle.radius_at(dz);
      if (std::abs(margin) < 0.6 || std::abs(dz - nozzle.length) < 1.0)
        continue;
      ++compared;
      CHECK(nozzle_collides(a, b, nozzle, ribbon) == sampled_collision(a, b, nozzle, ribbon));
    }
    CHECK(compared > 50);
  }
}

TEST_CASE("support feasibility") {
  NozzleModel ceramic;
  SUBCASE("vertical wall") {
    const auto m = fixtures::rectangle(10, 40);
    const auto r = support_feasible(m, compute_slope_limits(ceramic, m.xy_extent()), 1.0, 1.5);
    CHECK(r.feasible);
    CHECK(r.regions.empty());
  }
  SUBCASE("T shape needs ground supports under the bar ends") {
    const auto m = fixtures::t_shape();
    const auto r = support_feasible(m, compute_slope_limits(ceramic, m.xy_extent()), 1.0, 1.5);
    CHECK(r.feasible);
    REQUIRE(r.regions.size() == 2);
    for (const auto &region : r.regions) {
      CHECK(region.layer_index == 20);
      for (const auto &p : region.footprint)
        CHECK((p.x < 20.0 || p.x > 40.0));
    }
  }
  SUBCASE("overhang above model material") {
    const auto m = fixtures::overhang_above_material();
    const auto r = support_feasible(m, compute_slope_limits(ceramic, m.xy_extent()), 1.0, 1.5);
    CHECK_FALSE(r.feasible);
    CHECK_FALSE(r.violations.empty());
  }
}

TEST_CASE("profile text round trip and reorientation") {
  std::istringstream in("name box\n# clockwise on purpose\nloop outer\n0 0\n0 10\n10 10\n10 0\nend\n");
  const auto m = read_profile(in);
  CHECK(m.name == "box");
  REQUIRE(m.profile.size() == 1);
  double area = 0.0;
  const auto &v = m.profile[0].vertices;
  for (std::size_t i = 0; i < v.size(); ++i)
    area += v[i].x * v[(i + 1) % v.size()].z - v[(i + 1) % v.size()].x * v[i].z;
  CHECK(area > 0.0);
  std::ostringstream out;
  write_profile(out, m);
  std::istringstream again(out.str());
  const auto m2 = read_profile(again);
  CHECK(m2.profile[0].vertices == m.profile[0].vertices);
}

TEST_CASE("STL and OBJ readers") {
  const auto tube = fixtures::cylinder_mesh(10, 5, 12);
  std::ostringstream out;
  write_stl_ascii(out, tube);
  std::istringstream in(out.str());
  const auto back = read_stl(in);
  CHECK(back.mode == ModelMode::mesh3d);
  CHECK(back.mesh.vertices.size() == tube.mesh.vertices.size());
  CHECK(back.mesh.triangles.size() == tube.mesh.triangles.size());

  std::istringstream obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  const auto quad = read_obj(obj);
  CHECK(quad.mesh.triangles.size() == 2);
}

TEST_CASE("invalid models are rejected") {
  auto bow = fixtures::profile("bow", {{0, 0}, {10, 10}, {10, 0}, {0, 10}});
  CHECK_THROWS_AS(bow.validate(), Error);
  auto mesh = fixtures::cylinder_mesh(10, 5, 12);
  mesh.mesh.triangles.push_back({0, 1, 99});
  CHECK_THROWS_AS(mesh.validate(), Error);
}
