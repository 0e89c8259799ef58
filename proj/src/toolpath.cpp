#include "acap/toolpath.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

namespace acap {

namespace {

struct Projection {
  Point point;
  int segment = 0; // point lies on [segment, segment + 1]
  double t = 0.0;
};

/// Horizontally nearest point on a polyline; z is interpolated along the segment.
Projection nearest_horizontal(const Point &p, std::span<const Point> pts, bool closed) {
  Projection best{pts[0], 0, 0.0};
  double best_d = horizontal_distance(p, pts[0]);
  const std::size_t n = pts.size();
  const std::size_t segs = closed ? n : n - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    const Point &a = pts[i];
    const Point &b = pts[(i + 1) % n];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0)
      t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    const Point q = lerp(a, b, t);
    const double d = horizontal_distance(p, q);
    if (d < best_d - 1e-12) {
      best_d = d;
      best = {q, static_cast<int>(i), t};
    }
  }
  return best;
}

ToolpathVertex extrude(const Point &p, double thickness, int layer) { return {p, true, thickness, layer}; }

} // namespace

double Toolpath::extruded_length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i)
    if (vertices[i].extruding)
      total += distance(vertices[i - 1].position, vertices[i].position);
  return total;
}

double Transfer::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < moves.size(); ++i)
    total += distance(moves[i - 1].position, moves[i].position);
  return total;
}

std::vector<LayerPath> patch_layers(const OppPatch &patch, const SlicedModel &sliced, double flat_thickness) {
  std::vector<LayerPath> out;
  for (const SubOpp &sub : patch.sub_opps) {
    if (sub.curved) {
      const auto &stack = *sub.curved;
      for (int k = 0; k < stack.layer_count(); ++k) {
        LayerPath layer;
        layer.points = stack.layer_polyline(k);
        for (int c = 0; c < stack.column_count(); ++c)
          layer.thickness.push_back(stack.thickness(k, c));
        out.push_back(std::move(layer));
      }
      continue;
    }
    for (int e : sub.elements) {
      const LayerElement &el = sliced.elements[e];
      LayerPath layer;
      layer.points = el.points;
      layer.closed = el.closed();
      layer.thickness.assign(el.points.size(), flat_thickness);
      out.push_back(std::move(layer));
    }
  }
  return out;
}

ZigzagChoice zigzag_entries(std::span<const Polyline> layers) {
  ZigzagChoice out;
  const std::size_t n = layers.size();
  if (n == 0)
    return out;
  auto entry = [&](std::size_t i, int o) { return o ? layers[i].back() : layers[i].front(); };
  auto exit = [&](std::size_t i, int o) { return o ? layers[i].front() : layers[i].back(); };
  std::vector<std::array<double, 2>> cost(n, {0.0, 0.0});
  std::vector<std::array<int, 2>> from(n, {0, 0});
  for (std::size_t i = 1; i < n; ++i) {
    for (int o = 0; o < 2; ++o) {
      double best = std::numeric_limits<double>::infinity();
      for (int p = 0; p < 2; ++p) {
        const double c = cost[i - 1][p] + distance(exit(i - 1, p), entry(i, o));
        if (c < best) {
          best = c;
          from[i][o] = p;
        }
      }
      cost[i][o] = best;
    }
  }
  int o = cost[n - 1][1] < cost[n - 1][0] ? 1 : 0;
  out.cost = cost[n - 1][o];
  out.reversed.assign(n, false);
  for (std::size_t i = n; i-- > 0;) {
    out.reversed[i] = o == 1;
    o = from[i][o];
  }
  return out;
}

std::vector<ToolpathVertex> inter_layer_connection(const Point &exit, const Point &entry,
                                                   std::span<const Point> current_layer, bool closed, double D,
                                                   double t_min) {
  if (distance(exit, entry) <= D + 1e-12 || current_layer.size() < 2)
    return {extrude(entry, t_min, -1)};

  const Projection from = nearest_horizontal(exit, current_layer, closed);
  const Projection to = nearest_horizontal(entry, current_layer, closed);
  const Point lift{0.0, 0.0, t_min};
  std::vector<ToolpathVertex> out;
  out.push_back(extrude(from.point + lift, t_min, -1));

  const std::size_t n = current_layer.size();
  std::vector<double> cum(n, 0.0);
  for (std::size_t j = 1; j < n; ++j)
    cum[j] = cum[j - 1] + distance(current_layer[j - 1], current_layer[j]);
  const double total = closed ? cum[n - 1] + distance(current_layer[n - 1], current_layer[0]) : cum[n - 1];
  auto arc = [&](const Projection &p) {
    const Point &a = current_layer[p.segment];
    const Point &b = current_layer[(p.segment + 1) % n];
    return cum[p.segment] + p.t * distance(a, b);
  };
  const double s_from = arc(from);
  const double s_to = arc(to);
  // Offsets of the layer vertices strictly inside the walked interval, in walking order.
  std::vector<std::pair<double, std::size_t>> passed;
  if (closed && total > 0.0) {
    const double ahead = std::fmod(s_to - s_from + total, total);
    const bool forward = ahead <= total - ahead;
    const double span = forward ? ahead : total - ahead;
    for (std::size_t j = 0; j < n; ++j) {
      const double off = std::fmod((forward ? cum[j] - s_from : s_from - cum[j]) + 2.0 * total, total);
      if (off > 1e-12 && off < span - 1e-12)
        passed.emplace_back(off, j);
    }
  } else {
    const bool forward = s_to >= s_from;
    for (std::size_t j = 0; j < n; ++j) {
      const double off = forward ? cum[j] - s_from : s_from - cum[j];
      if (off > 1e-12 && off < std::abs(s_to - s_from) - 1e-12)
        passed.emplace_back(off, j);
    }
  }
  std::sort(passed.begin(), passed.end());
  for (const auto &[off, j] : passed)
    out.push_back(extrude(current_layer[j] + lift, t_min, -1));
  out.push_back(extrude(to.point + lift, t_min, -1));
  out.push_back(extrude(entry, t_min, -1));
  return out;
}

Toolpath zigzag_connect(std::span<const LayerPath> layers, double D, double t_min) {
  Toolpath tp;
  if (layers.empty())
    return tp;
  std::vector<Polyline> polys;
  for (const auto &l : layers)
    polys.push_back(l.points);
  const auto choice = zigzag_entries(polys);
  Polyline previous;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Polyline pts = layers[i].points;
    std::vector<double> th = layers[i].thickness;
    if (choice.reversed[i]) {
      std::reverse(pts.begin(), pts.end());
      std::reverse(th.begin(), th.end());
    }
    const int layer = static_cast<int>(i);
    if (i == 0) {
      tp.vertices.push_back({pts[0], false, 0.0, layer});
    } else {
      auto conn = inter_layer_connection(tp.vertices.back().position, pts[0], previous, false, D, t_min);
      conn.back().layer = layer;
      tp.vertices.insert(tp.vertices.end(), conn.begin(), conn.end());
    }
    for (std::size_t j = 1; j < pts.size(); ++j)
      tp.vertices.push_back(extrude(pts[j], th[j], layer));
    previous = std::move(pts);
  }
  return tp;
}

Toolpath patch_toolpath(const OppPatch &patch, const SlicedModel &sliced, const PrinterConfig &cfg) {
  const auto layers = patch_layers(patch, sliced, cfg.flat_layer_thickness);
  Toolpath out;
  out.opp_id = patch.id;
  std::size_t begin = 0;
  int layer_offset = 0;
  while (begin < layers.size()) {
    std::size_t end = begin;
    while (end < layers.size() && layers[end].closed == layers[begin].closed)
      ++end;
    const std::span<const LayerPath> run(layers.data() + begin, end - begin);
    Toolpath part = layers[begin].closed ? spiralize_contours(run, cfg.contour_samples)
                                         : zigzag_connect(run, cfg.connect_threshold, cfg.t_min);
    for (auto &v : part.vertices)
      if (v.layer >= 0)
        v.layer += layer_offset;
    if (out.vertices.empty()) {
      out.vertices = std::move(part.vertices);
    } else {
      const LayerPath &last = layers[begin - 1];
      auto conn = inter_layer_connection(out.vertices.back().position, part.vertices.front().position, last.points,
                                         last.closed, cfg.connect_threshold, cfg.t_min);
      conn.back().layer = part.vertices.front().layer;
      out.vertices.insert(out.vertices.end(), conn.begin(), conn.end());
      out.vertices.insert(out.vertices.end(), part.vertices.begin() + 1, part.vertices.end());
    }
    layer_offset += static_cast<int>(end - begin);
    begin = end;
  }
  return out;
}

std::vector<int> order_opps(const CurvedOppGraph &g) {
  auto order = g.dag.topological_order();
  if (!order)
    throw Error("OPP graph is cyclic");
  return *order;
}

PrintPlan plan_transfers(std::vector<Toolpath> ordered, double clearance, double speed) {
  if (speed <= 0.0)
    throw Error("speed must be positive");
  PrintPlan plan;
  double max_z = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i].vertices.empty())
      throw Error(fmt::format("toolpath for OPP {} is empty", ordered[i].opp_id));
    if (i > 0) {
      const Point from = plan.toolpaths.back().vertices.back().position;
      const Point to = ordered[i].vertices.front().position;
      const double safe = std::max({max_z, from.z, to.z}) + clearance;
      Transfer t;
      t.from_opp = plan.toolpaths.back().opp_id;
      t.to_opp = ordered[i].opp_id;
      for (const Point &p : {from, Point{from.x, from.y, safe}, Point{to.x, to.y, safe}, to})
        t.moves.push_back({p, false, 0.0, -1});
      plan.transfers.push_back(std::move(t));
    }
    for (const auto &v : ordered[i].vertices)
      max_z = std::max(max_z, v.position.z);
    plan.toolpaths.push_back(std::move(ordered[i]));
  }
  plan.stats.opp_count = static_cast<int>(plan.toolpaths.size());
  plan.stats.transfer_count = static_cast<int>(plan.transfers.size());
  for (const auto &tp : plan.toolpaths)
    plan.stats.total_extruded_length += tp.extruded_length();
  for (const auto &t : plan.transfers)
    plan.stats.transfer_length += t.length();
  plan.stats.estimated_time = (plan.stats.total_extruded_length + plan.stats.transfer_length) / speed;
  return plan;
}

// ---------------------------------------------------------------------------
// Spacing relaxation

namespace {

/// Vertex indices per layer, in path order.
using LayerIndex = std::map<int, std::vector<int>>;

LayerIndex index_layers(const Toolpath &tp) {
  LayerIndex out;
  for (std::size_t i = 0; i < tp.vertices.size(); ++i)
    if (tp.vertices[i].layer >= 0 && tp.vertices[i].extruding)
      out[tp.vertices[i].layer].push_back(static_cast<int>(i));
  return out;
}

std::optional<double> spacing_at(const Toolpath &tp, const LayerIndex &layers, int i) {
  const auto &v = tp.vertices[i];
  if (v.layer < 1 || !v.extruding)
    return std::nullopt;
  auto it = layers.find(v.layer - 1);
  if (it == layers.end() || it->second.empty())
    return std::nullopt;
  Polyline below;
  for (int j : it->second)
    below.push_back(tp.vertices[j].position);
  if (below.size() == 1)
    return v.position.z - below[0].z;
  return v.position.z - nearest_horizontal(v.position, below, false).point.z;
}

} // namespace

double mean_spacing_error(const PrintPlan &plan, double target) {
  double total = 0.0;
  int count = 0;
  for (const auto &tp : plan.toolpaths) {
    const auto layers = index_layers(tp);
    for (std::size_t i = 0; i < tp.vertices.size(); ++i)
      if (auto s = spacing_at(tp, layers, static_cast<int>(i))) {
        total += std::abs(*s - target);
        ++count;
      }
  }
  return count ? total / count : 0.0;
}

std::vector<std::string> audit_plan(const PrintPlan &plan, const StackLimits &limits) {
  std::vector<std::string> out;
  for (const auto &tp : plan.toolpaths) {
    const auto layers = index_layers(tp);
    for (std::size_t i = 0; i < tp.vertices.size(); ++i) {
      const auto &v = tp.vertices[i];
      if (!v.extruding)
        continue;
      if (v.local_thickness < limits.t_min - 1e-9 || v.local_thickness > limits.t_max + 1e-9)
        out.push_back(fmt::format("OPP {} vertex {}: thickness {:.6f}", tp.opp_id, i, v.local_thickness));
      if (auto s = spacing_at(tp, layers, static_cast<int>(i)))
        if (*s < limits.t_min - 1e-9 || *s > limits.t_max + 1e-9)
          out.push_back(fmt::format("OPP {} vertex {}: spacing {:.6f}", tp.opp_id, i, *s));
    }
    for (const auto &[layer, ids] : layers) {
      for (std::size_t k = 1; k < ids.size(); ++k) {
        const Point &a = tp.vertices[ids[k - 1]].position;
        const Point &b = tp.vertices[ids[k]].position;
        const double h = horizontal_distance(a, b);
        if (h > 1e-9 && std::abs(b.z - a.z) > limits.tan_max * h + 1e-6)
          out.push_back(fmt::format("OPP {} layer {}: slope {:.6f}", tp.opp_id, layer, std::abs(b.z - a.z) / h));
      }
    }
  }
  return out;
}

PrintPlan optimize_spacing(const PrintPlan &plan, const SpacingOptions &opts) {
  PrintPlan cur = plan;
  for (int it = 0; it < opts.iterations; ++it) {
    const double before = mean_spacing_error(cur, opts.target);
    bool accepted = false;
    double step = 1.0;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt, step /= 2.0) {
      PrintPlan cand = cur;
      for (std::size_t t = 0; t < cur.toolpaths.size(); ++t) {
        const Toolpath &src = cur.toolpaths[t];
        Toolpath &dst = cand.toolpaths[t];
        const auto layers = index_layers(src);
        const int last = static_cast<int>(src.vertices.size()) - 1;
        for (const auto &[layer, ids] : layers) {
          for (std::size_t k = 0; k < ids.size(); ++k) {
            const int i = ids[k];
            if (i == 0 || i == last)
              continue;
            const auto s = spacing_at(src, layers, i);
            if (!s)
              continue;
            double lap = 0.0;
            if (k > 0 && k + 1 < ids.size())
              lap = 0.5 * (src.vertices[ids[k - 1]].position.z + src.vertices[ids[k + 1]].position.z) -
                    src.vertices[i].position.z;
            const double dz = step * (0.5 * (opts.target - *s) + 0.25 * lap);
            const double origin = plan.toolpaths[t].vertices[i].position.z;
            dst.vertices[i].position.z =
                std::clamp(src.vertices[i].position.z + dz, origin - opts.max_displacement,
                           origin + opts.max_displacement);
          }
        }
        const auto moved = index_layers(dst);
        for (int i = 0; i <= last; ++i) {
          const auto old_s = spacing_at(src, layers, i);
          const auto new_s = spacing_at(dst, moved, i);
          if (old_s && new_s && std::abs(*old_s - *new_s) > 1e-12)
            dst.vertices[i].local_thickness = *new_s;
        }
      }
      if (audit_plan(cand, opts.limits).empty() && mean_spacing_error(cand, opts.target) <= before + 1e-12) {
        cur = std::move(cand);
        accepted = true;
      }
    }
    if (!accepted)
      break;
  }
  cur.stats.total_extruded_length = 0.0;
  for (const auto &tp : cur.toolpaths)
    cur.stats.total_extruded_length += tp.extruded_length();
  const double speed_time = plan.stats.total_extruded_length + plan.stats.transfer_length;
  if (speed_time > 0.0)
    cur.stats.estimated_time =
        plan.stats.estimated_time * (cur.stats.total_extruded_length + cur.stats.transfer_length) / speed_time;
  return cur;
}

} // namespace acap
