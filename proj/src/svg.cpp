#include "acap/svg.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include <fmt/format.h>

namespace acap {

std::string group_color(int id) {
  static constexpr std::array<const char *, 10> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b",
                                                           "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#393b79"};
  if (id < 0)
    return "#bbbbbb";
  return palette[id % palette.size()];
}

namespace {

class Canvas {
public:
  explicit Canvas(const SvgOptions &opts) : opts_(opts) {}

  void include(const Point &p) {
    lo_x_ = std::min(lo_x_, p.x);
    hi_x_ = std::max(hi_x_, p.x);
    lo_z_ = std::min(lo_z_, p.z);
    hi_z_ = std::max(hi_z_, p.z);
  }

  void polyline(std::span<const Point> pts, bool closed, const std::string &style) {
    if (pts.empty())
      return;
    std::string d;
    for (const auto &p : pts)
      d += fmt::format("{:.3f},{:.3f} ", px(p), pz(p));
    body_ += fmt::format("<{} points=\"{}\" fill=\"none\" {}/>\n", closed ? "polygon" : "polyline", d, style);
  }

  void arrow(const Point &a, const Point &b, bool dashed) {
    body_ += fmt::format("<line x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\" stroke=\"#444\" "
                         "stroke-width=\"0.8\" marker-end=\"url(#head)\"{}/>\n",
                         px(a), pz(a), px(b), pz(b), dashed ? " stroke-dasharray=\"4,3\"" : "");
  }

  std::string str() const {
    const bool empty = lo_x_ > hi_x_;
    const double w = empty ? 2 * opts_.margin : (hi_x_ - lo_x_) * opts_.scale + 2 * opts_.margin;
    const double h = empty ? 2 * opts_.margin : (hi_z_ - lo_z_) * opts_.scale + 2 * opts_.margin;
    return fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.1f}\" height=\"{:.1f}\" "
                       "viewBox=\"0 0 {:.1f} {:.1f}\">\n"
                       "<defs><marker id=\"head\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" "
                       "orient=\"auto\"><path d=\"M0,0 L6,3 L0,6 z\" fill=\"#444\"/></marker></defs>\n"
                       "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
                       w, h, w, h, body_);
  }

private:
  double px(const Point &p) const { return (p.x - lo_x_) * opts_.scale + opts_.margin; }
  double pz(const Point &p) const { return (hi_z_ - p.z) * opts_.scale + opts_.margin; }

  SvgOptions opts_;
  double lo_x_ = std::numeric_limits<double>::infinity();
  double hi_x_ = -std::numeric_limits<double>::infinity();
  double lo_z_ = std::numeric_limits<double>::infinity();
  double hi_z_ = -std::numeric_limits<double>::infinity();
  std::string body_;
};

Point midpoint(const LayerElement &e) {
  Point s;
  for (const auto &p : e.points)
    s = s + p;
  return e.points.empty() ? s : s * (1.0 / e.points.size());
}

} // namespace

std::string svg_elements(const SlicedModel &sliced, std::span<const int> group, const Dag *dep,
                         const SvgOptions &opts) {
  Canvas c(opts);
  for (const auto &e : sliced.elements)
    for (const auto &p : e.points)
      c.include(p);
  for (const auto &e : sliced.elements) {
    const int gid = e.id < static_cast<int>(group.size()) ? group[e.id] : -1;
    c.polyline(e.points, e.closed(),
               fmt::format("stroke=\"{}\" stroke-width=\"2\" data-group=\"{}\"", group_color(gid), gid));
  }
  if (dep)
    for (const auto &edge : dep->edges())
      c.arrow(midpoint(sliced.elements[edge.from]), midpoint(sliced.elements[edge.to]),
              edge.kind == EdgeKind::collision);
  return c.str();
}

std::string svg_plan(const PrintPlan &plan, const SvgOptions &opts) {
  Canvas c(opts);
  for (const auto &tp : plan.toolpaths)
    for (const auto &v : tp.vertices)
      c.include(v.position);
  for (const auto &tr : plan.transfers)
    for (const auto &v : tr.moves)
      c.include(v.position);
  for (const auto &tp : plan.toolpaths) {
    Polyline pts;
    for (const auto &v : tp.vertices)
      pts.push_back(v.position);
    c.polyline(pts, false,
               fmt::format("stroke=\"{}\" stroke-width=\"1\" data-opp=\"{}\"", group_color(tp.opp_id), tp.opp_id));
  }
  for (const auto &tr : plan.transfers) {
    Polyline pts;
    for (const auto &v : tr.moves)
      pts.push_back(v.position);
    c.polyline(pts, false, "stroke=\"red\" stroke-width=\"1.5\" stroke-dasharray=\"3,2\" class=\"transfer\"");
  }
  return c.str();
}

} // namespace acap
