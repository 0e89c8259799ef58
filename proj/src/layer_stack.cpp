#include "acap/curved_merge.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace acap {

namespace {

constexpr double kEps = 1e-9;

struct Knot {
  double x;
  double z;
};

double interpolate(const std::vector<Knot> &knots, double x) {
  if (x <= knots.front().x)
    return knots.front().z;
  if (x >= knots.back().x)
    return knots.back().z;
  auto it = std::upper_bound(knots.begin(), knots.end(), x, [](double v, const Knot &k) { return v < k.x; });
  const Knot &b = *it;
  const Knot &a = *(it - 1);
  if (b.x - a.x <= 0.0)
    return b.z;
  return a.z + (x - a.x) / (b.x - a.x) * (b.z - a.z);
}

/// z of an x-monotone polyline at x, or nullopt outside its x-range.
std::optional<double> polyline_z_at(const Polyline &pts, double x) {
  if (pts.empty())
    return std::nullopt;
  double lo = pts.front().x, hi = pts.back().x;
  if (lo > hi)
    std::swap(lo, hi);
  if (x < lo - kEps || x > hi + kEps)
    return std::nullopt;
  if (pts.size() == 1)
    return pts.front().z;
  std::vector<Knot> knots;
  for (const auto &p : pts)
    knots.push_back({p.x, p.z});
  std::stable_sort(knots.begin(), knots.end(), [](const Knot &a, const Knot &b) { return a.x < b.x; });
  return interpolate(knots, x);
}

/// Per column, (layer, element) pairs of the covering elements in layer order.
using ColumnCover = std::vector<std::pair<int, int>>;

int element_at(const ColumnCover &cover, int layer) {
  for (const auto &[l, e] : cover)
    if (l == layer)
      return e;
  return -1;
}

/// Step knots along one boundary plus plateau knots on long flat runs.
std::vector<Knot> boundary_knots(const SlicedModel &sliced, const std::vector<double> &x,
                                 const std::vector<ColumnCover> &cover, const std::vector<int> &layer,
                                 const std::vector<double> &raw, bool top, double plateau) {
  const double half = sliced.thickness / 2.0;
  const auto z_of = [&](int l) { return sliced.layer_z(l); };
  std::vector<Knot> knots;
  const int n = static_cast<int>(x.size());
  int run_start = 0;
  for (int c = 0; c < n; ++c) {
    const bool run_ends = c + 1 == n || layer[c + 1] != layer[c];
    if (run_ends) {
      if (x[c] - x[run_start] >= plateau - kEps) {
        knots.push_back({x[run_start] + plateau / 2.0, raw[c]});
        knots.push_back({x[c] - plateau / 2.0, raw[c]});
      }
      run_start = c + 1;
    }
    if (c + 1 == n)
      break;
    const int p = layer[c];
    const int q = layer[c + 1];
    if (p == q)
      continue;
    // Layers that cover exactly one of the two columns define where the wall crosses.
    const bool right_side = top ? q > p : q < p;
    const int first = top ? std::min(p, q) + 1 : std::min(p, q);
    const int last = top ? std::max(p, q) : std::max(p, q) - 1;
    std::vector<Knot> step;
    for (int l = first; l <= last; ++l) {
      const int e = right_side ? element_at(cover[c + 1], l) : element_at(cover[c], l);
      if (e < 0)
        continue;
      const LayerElement &el = sliced.elements[e];
      const double wx = right_side ? el.min_x() : el.max_x();
      step.push_back({wx, z_of(l) + (top ? -half : half)});
    }
    std::stable_sort(step.begin(), step.end(), [](const Knot &a, const Knot &b) { return a.x < b.x; });
    knots.insert(knots.end(), step.begin(), step.end());
  }
  std::stable_sort(knots.begin(), knots.end(), [](const Knot &a, const Knot &b) { return a.x < b.x; });
  return knots;
}

} // namespace

double CurvedLayerStack::thickness(int k, int c) const {
  if (layer_count() < 2)
    return base_thickness;
  if (k == 0)
    return heights[1][c] - heights[0][c];
  return heights[k][c] - heights[k - 1][c];
}

Polyline CurvedLayerStack::layer_polyline(int k) const {
  Polyline out;
  out.reserve(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c)
    out.push_back({columns[c], 0.0, heights[k][c]});
  return out;
}

Outcome<ColumnRegion> column_region(const SlicedModel &sliced, std::span<const int> element_ids, double spacing) {
  if (element_ids.empty())
    return Outcome<ColumnRegion>::refuse("region has no elements");
  if (spacing <= 0.0)
    throw Error("column spacing must be positive");
  double xmin = sliced.elements[element_ids[0]].min_x();
  double xmax = sliced.elements[element_ids[0]].max_x();
  for (int id : element_ids) {
    const auto &e = sliced.elements[id];
    if (e.kind != ElementKind::segment)
      return Outcome<ColumnRegion>::refuse("column regions need segment elements");
    xmin = std::min(xmin, e.min_x());
    xmax = std::max(xmax, e.max_x());
  }
  const int count = std::max(1, static_cast<int>(std::ceil((xmax - xmin) / spacing - kEps))) + 1;
  const double dx = count > 1 ? (xmax - xmin) / (count - 1) : 0.0;

  ColumnRegion region;
  std::vector<ColumnCover> cover(count);
  std::vector<int> lo(count), hi(count);
  for (int c = 0; c < count; ++c) {
    const double x = c + 1 == count ? xmax : xmin + c * dx;
    region.x.push_back(x);
    for (int id : element_ids) {
      const auto &e = sliced.elements[id];
      if (e.min_x() - kEps <= x && x <= e.max_x() + kEps)
        cover[c].emplace_back(e.layer_index, id);
    }
    auto &cc = cover[c];
    if (cc.empty())
      return Outcome<ColumnRegion>::refuse(fmt::format("region is disconnected at x={:.3f}", x));
    std::sort(cc.begin(), cc.end());
    for (std::size_t i = 1; i < cc.size(); ++i) {
      if (cc[i].first == cc[i - 1].first)
        return Outcome<ColumnRegion>::refuse(
            fmt::format("column x={:.3f} meets two elements on layer {}", x, cc[i].first));
      if (cc[i].first != cc[i - 1].first + 1)
        return Outcome<ColumnRegion>::refuse(
            fmt::format("column x={:.3f} skips layers {}..{}", x, cc[i - 1].first + 1, cc[i].first - 1));
    }
    lo[c] = cc.front().first;
    hi[c] = cc.back().first;
    region.raw_bottom.push_back(sliced.layer_z(lo[c]));
    region.raw_top.push_back(sliced.layer_z(hi[c]));
    region.bottom_element.push_back(cc.front().second);
    region.top_element.push_back(cc.back().second);
  }

  const double plateau = 4.0 * spacing;
  auto smooth = [&](const std::vector<int> &layer, const std::vector<double> &raw, bool top) {
    const auto knots = boundary_knots(sliced, region.x, cover, layer, raw, top, plateau);
    if (knots.empty())
      return raw;
    std::vector<double> out(count);
    for (int c = 0; c < count; ++c)
      out[c] = interpolate(knots, region.x[c]);
    return out;
  };
  region.bottom = smooth(lo, region.raw_bottom, false);
  region.top = smooth(hi, region.raw_top, true);
  return Outcome<ColumnRegion>::ok(std::move(region));
}

Outcome<CurvedLayerStack> curved_layer_feasibility(const ColumnRegion &region, const TargetFlatAreas &areas,
                                                   const StackLimits &limits) {
  using Result = Outcome<CurvedLayerStack>;
  const int count = static_cast<int>(region.x.size());
  if (count == 0)
    return Result::refuse("empty region");
  std::vector<double> bottom = region.bottom;
  std::vector<double> top = region.top;
  auto apply = [&](const std::vector<Polyline> &polys, std::vector<double> &side) {
    for (const auto &poly : polys)
      for (int c = 0; c < count; ++c)
        if (auto z = polyline_z_at(poly, region.x[c]))
          side[c] = *z;
  };
  apply(areas.top, top);
  apply(areas.obliques, top);
  apply(areas.bottom, bottom);

  double min_h = top[0] - bottom[0];
  double max_h = min_h;
  for (int c = 0; c < count; ++c) {
    const double h = top[c] - bottom[c];
    if (h < -kEps)
      return Result::refuse(fmt::format("top below bottom at x={:.3f}", region.x[c]));
    min_h = std::min(min_h, h);
    max_h = std::max(max_h, h);
  }

  CurvedLayerStack stack;
  stack.columns = region.x;
  if (max_h <= kEps) {
    stack.heights = {bottom};
    stack.base_thickness = limits.t_min;
  } else {
    const int m_lo = std::max(1, static_cast<int>(std::ceil(max_h / limits.t_max - kEps)));
    const int m_hi = static_cast<int>(std::floor(min_h / limits.t_min + kEps));
    if (m_lo > m_hi)
      return Result::refuse(fmt::format("no shared layer count: heights {:.3f}..{:.3f} need between {} and {} gaps",
                                        min_h, max_h, m_lo, m_hi));
    for (int c = 0; c + 1 < count; ++c) {
      const double dx = region.x[c + 1] - region.x[c];
      for (const auto *side : {&bottom, &top})
        if (std::abs((*side)[c + 1] - (*side)[c]) > limits.tan_max * dx + kEps)
          return Result::refuse(fmt::format("{} boundary too steep at x={:.3f}", side == &top ? "top" : "bottom",
                                            region.x[c]));
    }
    const int m = m_lo;
    stack.heights.assign(m + 1, std::vector<double>(count));
    for (int k = 0; k <= m; ++k)
      for (int c = 0; c < count; ++c)
        stack.heights[k][c] = k == m ? top[c] : bottom[c] + k * (top[c] - bottom[c]) / m;
  }
  if (auto problems = audit_stack(stack, limits); !problems.empty())
    return Result::refuse("stack audit failed: " + problems.front());
  return Result::ok(std::move(stack));
}

std::vector<std::string> audit_stack(const CurvedLayerStack &stack, const StackLimits &limits) {
  std::vector<std::string> out;
  const int n = stack.layer_count();
  const int cols = stack.column_count();
  for (int c = 0; c + 1 < cols; ++c)
    if (!(stack.columns[c + 1] > stack.columns[c]))
      out.push_back(fmt::format("columns not increasing at {}", c));
  for (int k = 0; k < n; ++k) {
    if (static_cast<int>(stack.heights[k].size()) != cols) {
      out.push_back(fmt::format("layer {} has {} samples, expected {}", k, stack.heights[k].size(), cols));
      return out;
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int c = 0; c < cols; ++c) {
      const double t = stack.thickness(k, c);
      if (t < limits.t_min - 1e-9 || t > limits.t_max + 1e-9)
        out.push_back(fmt::format("layer {} column {}: thickness {:.6f} outside [{}, {}]", k, c, t, limits.t_min,
                                  limits.t_max));
      if (c + 1 < cols) {
        const double slope = std::abs(stack.heights[k][c + 1] - stack.heights[k][c]) /
                             (stack.columns[c + 1] - stack.columns[c]);
        if (slope > limits.tan_max + 1e-6)
          out.push_back(fmt::format("layer {} column {}: slope {:.6f} above {:.6f}", k, c, slope, limits.tan_max));
      }
    }
  }
  return out;
}

void write_stack(std::ostream &out, const CurvedLayerStack &stack) {
  out << fmt::format("stack {} {}\n", stack.layer_count(), stack.column_count());
  out << "x";
  for (double x : stack.columns)
    out << fmt::format(" {}", x);
  out << '\n';
  for (int k = 0; k < stack.layer_count(); ++k) {
    out << "layer " << k;
    for (double z : stack.heights[k])
      out << fmt::format(" {}", z);
    out << '\n';
  }
  if (stack.layer_count() < 2)
    out << fmt::format("base {}\n", stack.base_thickness);
  out << "end\n";
}

CurvedLayerStack read_stack(std::istream &in) {
  CurvedLayerStack stack;
  std::string line;
  int layers = -1, cols = -1;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head))
      continue;
    if (head == "stack") {
      if (!(ls >> layers >> cols) || layers < 0 || cols < 0)
        throw Error("stack: bad header");
      stack.heights.assign(layers, {});
    } else if (head == "x") {
      double v;
      while (ls >> v)
        stack.columns.push_back(v);
    } else if (head == "layer") {
      int k = -1;
      if (!(ls >> k) || k < 0 || k >= layers)
        throw Error("stack: bad layer index");
      double v;
      while (ls >> v)
        stack.heights[k].push_back(v);
    } else if (head == "base") {
      ls >> stack.base_thickness;
    } else if (head == "end") {
      break;
    } else {
      throw Error(fmt::format("stack: unknown record '{}'", head));
    }
  }
  if (layers < 0)
    throw Error("stack: missing header");
  if (static_cast<int>(stack.columns.size()) != cols)
    throw Error("stack: column count mismatch");
  for (const auto &row : stack.heights)
    if (static_cast<int>(row.size()) != cols)
      throw Error("stack: layer sample count mismatch");
  return stack;
}

} // namespace acap
