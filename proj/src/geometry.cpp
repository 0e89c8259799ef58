#include "acap/geometry.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numbers>
#include <unordered_map>

#include <fmt/format.h>

namespace acap {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double cross2(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

double point_segment_distance_2d(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0)
    t = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
  return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

int orientation_sign(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment_2d(double px, double py, double ax, double ay, double bx, double by) {
  return std::min(ax, bx) <= px && px <= std::max(ax, bx) && std::min(ay, by) <= py && py <= std::max(ay, by);
}

/// Closed segment intersection test in the plane.
bool segments_intersect_2d(double ax, double ay, double bx, double by, double cx, double cy, double dx, double dy) {
  const int o1 = orientation_sign(cross2(bx - ax, by - ay, cx - ax, cy - ay));
  const int o2 = orientation_sign(cross2(bx - ax, by - ay, dx - ax, dy - ay));
  const int o3 = orientation_sign(cross2(dx - cx, dy - cy, ax - cx, ay - cy));
  const int o4 = orientation_sign(cross2(dx - cx, dy - cy, bx - cx, by - cy));
  if (o1 != o2 && o3 != o4)
    return true;
  if (o1 == 0 && on_segment_2d(cx, cy, ax, ay, bx, by))
    return true;
  if (o2 == 0 && on_segment_2d(dx, dy, ax, ay, bx, by))
    return true;
  if (o3 == 0 && on_segment_2d(ax, ay, cx, cy, dx, dy))
    return true;
  if (o4 == 0 && on_segment_2d(bx, by, cx, cy, dx, dy))
    return true;
  return false;
}

template <typename Fn> void for_each_edge(std::span<const Point> pts, bool closed, Fn &&fn) {
  if (pts.size() == 1) {
    fn(pts[0], pts[0]);
    return;
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    fn(pts[i], pts[i + 1]);
  if (closed && pts.size() > 2)
    fn(pts.back(), pts.front());
}

/// Sorted crossings of the horizontal line at height z with all profile loops.
std::vector<double> profile_row_crossings(const std::vector<ProfileLoop> &loops, double z) {
  std::vector<double> xs;
  for (const auto &loop : loops) {
    const auto &v = loop.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point &p = v[i];
      const Point &q = v[(i + 1) % v.size()];
      if ((p.z <= z && z < q.z) || (q.z <= z && z < p.z))
        xs.push_back(p.x + (z - p.z) / (q.z - p.z) * (q.x - p.x));
    }
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

/// Sorted crossings of the vertical line at x with all profile loops (z values).
std::vector<double> profile_column_crossings(const std::vector<ProfileLoop> &loops, double x) {
  std::vector<double> zs;
  for (const auto &loop : loops) {
    const auto &v = loop.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point &p = v[i];
      const Point &q = v[(i + 1) % v.size()];
      if ((p.x <= x && x < q.x) || (q.x <= x && x < p.x))
        zs.push_back(p.z + (x - p.x) / (q.x - p.x) * (q.z - p.z));
    }
  }
  std::sort(zs.begin(), zs.end());
  return zs;
}

std::vector<LayerElement> slice_profile_layer(const SurfaceModel &model, double z) {
  std::vector<LayerElement> out;
  const auto xs = profile_row_crossings(model.profile, z);
  std::vector<std::pair<double, double>> intervals;
  for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
    if (xs[i + 1] <= xs[i])
      continue;
    if (!intervals.empty() && intervals.back().second >= xs[i])
      intervals.back().second = xs[i + 1];
    else
      intervals.emplace_back(xs[i], xs[i + 1]);
  }
  for (const auto &[x0, x1] : intervals) {
    LayerElement e;
    e.z = z;
    e.kind = ElementKind::segment;
    e.points = {Point{x0, 0.0, z}, Point{x1, 0.0, z}};
    out.push_back(std::move(e));
  }
  return out;
}

struct EdgeKey {
  int a;
  int b;
  bool operator==(const EdgeKey &) const = default;
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey &k) const {
    return std::hash<long long>()((static_cast<long long>(k.a) << 32) ^ static_cast<unsigned>(k.b));
  }
};

EdgeKey make_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

void check_mesh_manifold(const TriangleMesh &mesh) {
  std::unordered_map<EdgeKey, int, EdgeKeyHash> use;
  for (const auto &t : mesh.triangles)
    for (int i = 0; i < 3; ++i)
      if (++use[make_key(t[i], t[(i + 1) % 3])] > 2)
        throw Error(fmt::format("non-manifold mesh: edge ({}, {}) is shared by more than two triangles",
                                t[i], t[(i + 1) % 3]));
}

std::vector<LayerElement> slice_mesh_layer(const TriangleMesh &mesh, double z) {
  struct Cut {
    EdgeKey k0, k1;
  };
  std::vector<Cut> cuts;
  std::unordered_map<EdgeKey, Point, EdgeKeyHash> key_point;
  std::unordered_map<EdgeKey, std::vector<int>, EdgeKeyHash> key_cuts;

  for (const auto &t : mesh.triangles) {
    EdgeKey keys[2];
    int found = 0;
    for (int i = 0; i < 3; ++i) {
      const int ia = t[i];
      const int ib = t[(i + 1) % 3];
      const Point &a = mesh.vertices[ia];
      const Point &b = mesh.vertices[ib];
      if ((a.z >= z) == (b.z >= z))
        continue;
      const EdgeKey key = make_key(ia, ib);
      if (!key_point.contains(key)) {
        const Point &lo = mesh.vertices[key.a];
        const Point &hi = mesh.vertices[key.b];
        key_point[key] = lerp(lo, hi, (z - lo.z) / (hi.z - lo.z));
      }
      if (found < 2)
        keys[found] = key;
      ++found;
    }
    if (found != 2)
      continue;
    const int id = static_cast<int>(cuts.size());
    cuts.push_back({keys[0], keys[1]});
    key_cuts[keys[0]].push_back(id);
    key_cuts[keys[1]].push_back(id);
  }
  for (const auto &[key, list] : key_cuts)
    if (list.size() > 2)
      throw Error(fmt::format("non-manifold mesh: slice at z={} meets edge ({}, {}) more than twice", z, key.a,
                              key.b));

  std::vector<char> used(cuts.size(), 0);
  std::vector<LayerElement> out;
  auto walk = [&](int start_cut, EdgeKey start_key) {
    LayerElement e;
    e.z = z;
    EdgeKey key = start_key;
    int cut = start_cut;
    e.points.push_back(key_point[key]);
    while (cut >= 0 && !used[cut]) {
      used[cut] = 1;
      const EdgeKey next = cuts[cut].k0 == key ? cuts[cut].k1 : cuts[cut].k0;
      key = next;
      int following = -1;
      for (int c : key_cuts[key])
        if (!used[c])
          following = c;
      if (following < 0 && key == start_key) {
        e.kind = ElementKind::contour;
        break;
      }
      e.points.push_back(key_point[key]);
      cut = following;
    }
    for (auto &p : e.points)
      p.z = z;
    out.push_back(std::move(e));
  };

  // Open chains start at edges used by a single cut; iterate in cut order for determinism.
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    if (used[c])
      continue;
    for (const EdgeKey &k : {cuts[c].k0, cuts[c].k1}) {
      if (key_cuts[k].size() == 1 && !used[c]) {
        walk(static_cast<int>(c), k);
      }
    }
  }
  for (std::size_t c = 0; c < cuts.size(); ++c)
    if (!used[c])
      walk(static_cast<int>(c), cuts[c].k0);
  return out;
}

} // namespace

double polyline_length(std::span<const Point> pts, bool closed) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    len += distance(pts[i], pts[i + 1]);
  if (closed && pts.size() > 2)
    len += distance(pts.back(), pts.front());
  return len;
}

double horizontal_segment_distance(const Point &a0, const Point &a1, const Point &b0, const Point &b1) {
  if (segments_intersect_2d(a0.x, a0.y, a1.x, a1.y, b0.x, b0.y, b1.x, b1.y))
    return 0.0;
  return std::min({point_segment_distance_2d(a0.x, a0.y, b0.x, b0.y, b1.x, b1.y),
                   point_segment_distance_2d(a1.x, a1.y, b0.x, b0.y, b1.x, b1.y),
                   point_segment_distance_2d(b0.x, b0.y, a0.x, a0.y, a1.x, a1.y),
                   point_segment_distance_2d(b1.x, b1.y, a0.x, a0.y, a1.x, a1.y)});
}

double horizontal_point_polyline_distance(const Point &p, std::span<const Point> pts, bool closed) {
  double best = std::numeric_limits<double>::infinity();
  for_each_edge(pts, closed, [&](const Point &a, const Point &b) {
    best = std::min(best, point_segment_distance_2d(p.x, p.y, a.x, a.y, b.x, b.y));
  });
  return best;
}

// ---------------------------------------------------------------------------

bool SurfaceModel::empty() const {
  return mode == ModelMode::profile2d ? profile.empty() : mesh.triangles.empty();
}

double SurfaceModel::min_z() const {
  double m = std::numeric_limits<double>::infinity();
  if (mode == ModelMode::profile2d) {
    for (const auto &l : profile)
      for (const auto &p : l.vertices)
        m = std::min(m, p.z);
  } else {
    for (const auto &t : mesh.triangles)
      for (int v : t)
        m = std::min(m, mesh.vertices[v].z);
  }
  return m;
}

double SurfaceModel::max_z() const {
  double m = -std::numeric_limits<double>::infinity();
  if (mode == ModelMode::profile2d) {
    for (const auto &l : profile)
      for (const auto &p : l.vertices)
        m = std::max(m, p.z);
  } else {
    for (const auto &t : mesh.triangles)
      for (int v : t)
        m = std::max(m, mesh.vertices[v].z);
  }
  return m;
}

double SurfaceModel::xy_extent() const {
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
  double lo_y = lo_x, hi_y = hi_x;
  auto add = [&](const Point &p) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  };
  if (mode == ModelMode::profile2d) {
    for (const auto &l : profile)
      for (const auto &p : l.vertices)
        add(p);
  } else {
    for (const auto &p : mesh.vertices)
      add(p);
  }
  if (hi_x < lo_x)
    return 0.0;
  return std::hypot(hi_x - lo_x, hi_y - lo_y);
}

void SurfaceModel::validate() const {
  if (mode == ModelMode::profile2d) {
    // Edges as (loop, index) pairs; adjacent edges of one loop share a vertex and are skipped.
    struct Edge {
      std::size_t loop, idx;
      Point a, b;
    };
    std::vector<Edge> edges;
    for (std::size_t l = 0; l < profile.size(); ++l) {
      const auto &v = profile[l].vertices;
      if (v.size() < 3)
        throw Error(fmt::format("profile loop {} has fewer than 3 vertices", l));
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].finite())
          throw Error(fmt::format("profile loop {} vertex {} is not finite", l, i));
        edges.push_back({l, i, v[i], v[(i + 1) % v.size()]});
      }
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        const Edge &e = edges[i];
        const Edge &f = edges[j];
        if (e.loop == f.loop) {
          const std::size_t n = profile[e.loop].vertices.size();
          if (f.idx == e.idx + 1 || (e.idx == 0 && f.idx == n - 1))
            continue;
        }
        if (segments_intersect_2d(e.a.x, e.a.z, e.b.x, e.b.z, f.a.x, f.a.z, f.b.x, f.b.z))
          throw Error(fmt::format("profile is not simple: loop {} edge {} meets loop {} edge {}", e.loop, e.idx,
                                  f.loop, f.idx));
      }
    }
  } else {
    const int n = static_cast<int>(mesh.vertices.size());
    for (const auto &p : mesh.vertices)
      if (!p.finite())
        throw Error("mesh has a non-finite vertex");
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
      for (int v : mesh.triangles[t])
        if (v < 0 || v >= n)
          throw Error(fmt::format("triangle {} references missing vertex {}", t, v));
  }
}

double LayerElement::min_x() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto &p : points)
    m = std::min(m, p.x);
  return m;
}

double LayerElement::max_x() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto &p : points)
    m = std::max(m, p.x);
  return m;
}

SlicedModel slice_model(const SurfaceModel &model, double thickness, double path_width) {
  if (!(thickness > 0.0))
    throw Error("slice thickness must be positive");
  SlicedModel out;
  out.thickness = thickness;
  if (model.empty())
    return out;
  model.validate();
  if (model.mode == ModelMode::mesh3d)
    check_mesh_manifold(model.mesh);

  out.base_z = model.min_z();
  const double top = model.max_z();
  for (int layer = 0;; ++layer) {
    const double z = out.layer_z(layer);
    if (z >= top)
      break;
    auto elements = model.mode == ModelMode::profile2d ? slice_profile_layer(model, z)
                                                       : slice_mesh_layer(model.mesh, z);
    std::sort(elements.begin(), elements.end(), [](const LayerElement &a, const LayerElement &b) {
      auto key = [](const LayerElement &e) {
        Point lo = e.points.front();
        for (const auto &p : e.points)
          if (p.x < lo.x || (p.x == lo.x && p.y < lo.y))
            lo = p;
        return std::pair{lo.x, lo.y};
      };
      return key(a) < key(b);
    });
    std::vector<int> ids;
    for (auto &e : elements) {
      if (e.kind == ElementKind::segment && (e.points.size() < 2 || e.points.front() == e.points.back()))
        continue;
      e.id = static_cast<int>(out.elements.size());
      e.layer_index = layer;
      e.degenerate = path_width > 0.0 && polyline_length(e.points, false) < 0.25 * path_width;
      ids.push_back(e.id);
      out.elements.push_back(std::move(e));
    }
    out.layers.push_back(std::move(ids));
  }
  // Trailing empty layers carry no information.
  while (!out.layers.empty() && out.layers.back().empty())
    out.layers.pop_back();
  return out;
}

double element_distance(const LayerElement &a, const LayerElement &b) {
  double best = std::numeric_limits<double>::infinity();
  for_each_edge(a.points, a.closed(), [&](const Point &a0, const Point &a1) {
    if (best == 0.0)
      return;
    for_each_edge(b.points, b.closed(), [&](const Point &b0, const Point &b1) {
      if (best == 0.0)
        return;
      best = std::min(best, horizontal_segment_distance(a0, a1, b0, b1));
    });
  });
  return best;
}

// ---------------------------------------------------------------------------

double NozzleModel::radius_at(double dz) const {
  if (dz < 0.0)
    return 0.0;
  const double cone_top = outlet_radius + length / std::tan(cone_angle_deg * kDeg);
  if (dz <= length)
    return outlet_radius + dz / std::tan(cone_angle_deg * kDeg);
  return std::max(carriage_extent(), cone_top);
}

void NozzleModel::validate() const {
  if (!(outlet_radius > 0.0))
    throw Error("nozzle.outlet_radius must be > 0");
  if (!(length > 0.0))
    throw Error("nozzle.length must be > 0");
  if (!(cone_angle_deg > 0.0 && cone_angle_deg < 90.0))
    throw Error("nozzle.cone_angle must lie in (0, 90) degrees");
  if (!(reference_thickness > 0.0))
    throw Error("nozzle.reference_thickness must be > 0");
}

std::vector<std::string> PrinterConfig::problems() const {
  std::vector<std::string> out;
  if (!(t_min > 0.0))
    out.push_back(fmt::format("t_min: must be > 0 (got {})", t_min));
  if (!(t_min <= flat_layer_thickness))
    out.push_back(fmt::format("t_min: must not exceed flat_layer_thickness ({} > {})", t_min, flat_layer_thickness));
  if (!(flat_layer_thickness <= t_max))
    out.push_back(
        fmt::format("t_max: must be >= flat_layer_thickness ({} < {})", t_max, flat_layer_thickness));
  if (!(t_min <= t_max))
    out.push_back(fmt::format("t_min: must not exceed t_max ({} > {})", t_min, t_max));
  if (!(path_width > 0.0))
    out.push_back(fmt::format("path_width: must be > 0 (got {})", path_width));
  if (!(connect_threshold >= 0.0))
    out.push_back(fmt::format("connect_threshold: must be >= 0 (got {})", connect_threshold));
  if (beam_width < 1)
    out.push_back(fmt::format("beam_width: must be >= 1 (got {})", beam_width));
  if (!(speed > 0.0))
    out.push_back(fmt::format("speed: must be > 0 (got {})", speed));
  if (!(extrusion_coefficient > 0.0))
    out.push_back(fmt::format("extrusion_coefficient: must be > 0 (got {})", extrusion_coefficient));
  if (contour_samples < 3)
    out.push_back(fmt::format("contour_samples: must be >= 3 (got {})", contour_samples));
  if (spacing_iterations < 0)
    out.push_back(fmt::format("spacing_iterations: must be >= 0 (got {})", spacing_iterations));
  try {
    nozzle.validate();
  } catch (const Error &e) {
    out.push_back(e.what());
  }
  return out;
}

void PrinterConfig::validate() const {
  const auto list = problems();
  if (list.empty())
    return;
  std::string msg = "invalid printer config:";
  for (const auto &p : list)
    msg += "\n  " + p;
  throw Error(msg);
}

double SlopeLimits::max_tan() const { return std::tan(max_deg * kDeg); }

SlopeLimits compute_slope_limits(const NozzleModel &nozzle, double object_extent) {
  SlopeLimits s;
  s.nozzle_deg = nozzle.cone_angle_deg;
  s.object_deg = object_extent <= 0.0 ? 90.0 : std::atan(nozzle.length / object_extent) / kDeg;
  s.outlet_deg = std::atan(nozzle.reference_thickness / nozzle.outlet_radius) / kDeg;
  s.max_deg = std::min({s.nozzle_deg, s.object_deg, s.outlet_deg});
  return s;
}

bool nozzle_collides(const LayerElement &printing, const LayerElement &printed, const NozzleModel &nozzle,
                     const RibbonModel &ribbon) {
  if (printed.layer_index <= printing.layer_index + 1)
    return false;
  // The ribbon's highest point is directly above its centerline and the solid widens upward,
  // so the closest approach is the projected distance at the ribbon's top.
  const double dz = printed.z + 0.5 * ribbon.thickness - printing.z;
  if (dz <= ribbon.thickness)
    return false;
  return element_distance(printing, printed) - ribbon.half_width < nozzle.radius_at(dz);
}

// ---------------------------------------------------------------------------

namespace {

Polyline sample_element(const LayerElement &e, double spacing) {
  Polyline out;
  for_each_edge(e.points, e.closed(), [&](const Point &a, const Point &b) {
    const double len = distance(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    for (int i = 0; i < n; ++i)
      out.push_back(lerp(a, b, static_cast<double>(i) / n));
  });
  if (!e.closed())
    out.push_back(e.points.back());
  return out;
}

bool ray_hits_profile(const SurfaceModel &model, const Point &p, double thickness) {
  const auto zs = profile_column_crossings(model.profile, p.x);
  for (std::size_t i = 0; i + 1 < zs.size(); i += 2) {
    const double lo = zs[i];
    const double hi = zs[i + 1];
    if (lo <= p.z && p.z <= hi)
      continue; // the material the point sits in
    if (hi < p.z - 1.5 * thickness)
      return true;
  }
  return false;
}

bool ray_hits_mesh(const TriangleMesh &mesh, const Point &p, double thickness) {
  for (const auto &t : mesh.triangles) {
    const Point &a = mesh.vertices[t[0]];
    const Point &b = mesh.vertices[t[1]];
    const Point &c = mesh.vertices[t[2]];
    const double det = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
    if (std::abs(det) < 1e-15)
      continue;
    const double l1 = ((b.y - c.y) * (p.x - c.x) + (c.x - b.x) * (p.y - c.y)) / det;
    const double l2 = ((c.y - a.y) * (p.x - c.x) + (a.x - c.x) * (p.y - c.y)) / det;
    const double l3 = 1.0 - l1 - l2;
    if (l1 < 0.0 || l2 < 0.0 || l3 < 0.0)
      continue;
    const double z = l1 * a.z + l2 * b.z + l3 * c.z;
    if (z < p.z - 1.5 * thickness)
      return true;
  }
  return false;
}

} // namespace

SupportReport support_feasible(const SurfaceModel &model, const SlopeLimits &slope, double layer_thickness,
                               double sample_spacing) {
  SupportReport report;
  if (model.empty())
    return report;
  const SlicedModel sliced = slice_model(model, layer_thickness);
  const double tan_max = slope.max_tan();
  const double allowed = tan_max > 0.0 ? layer_thickness / tan_max : std::numeric_limits<double>::infinity();

  for (std::size_t layer = 1; layer < sliced.layers.size(); ++layer) {
    const auto &below = sliced.layers[layer - 1];
    for (int id : sliced.layers[layer]) {
      const LayerElement &e = sliced.elements[id];
      SupportRegion current;
      current.layer_index = static_cast<int>(layer);
      auto flush = [&] {
        if (!current.footprint.empty())
          report.regions.push_back(current);
        current.footprint.clear();
      };
      for (const Point &p : sample_element(e, sample_spacing)) {
        double nearest = std::numeric_limits<double>::infinity();
        for (int b : below)
          nearest = std::min(nearest, horizontal_point_polyline_distance(p, sliced.elements[b].points,
                                                                         sliced.elements[b].closed()));
        if (nearest <= allowed + 1e-9) {
          flush();
          continue;
        }
        const bool hit = model.mode == ModelMode::profile2d ? ray_hits_profile(model, p, layer_thickness)
                                                            : ray_hits_mesh(model.mesh, p, layer_thickness);
        if (hit) {
          report.feasible = false;
          report.violations.push_back(p);
          flush();
        } else {
          current.height = p.z - sliced.base_z;
          current.footprint.push_back(p);
        }
      }
      flush();
    }
  }
  return report;
}

} // namespace acap
