#include "acap/toolpath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace acap {

namespace {

double signed_area_xy(std::span<const Point> pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point &p = pts[i];
    const Point &q = pts[(i + 1) % pts.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return a / 2.0;
}

Polyline counter_clockwise(Polyline pts) {
  if (signed_area_xy(pts) < 0.0)
    std::reverse(pts.begin() + 1, pts.end());
  return pts;
}

} // namespace

Polyline resample_closed(std::span<const Point> contour, int m) {
  if (m < 1)
    throw Error("resample count must be positive");
  if (contour.empty())
    return {};
  const std::size_t n = contour.size();
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    cum[i + 1] = cum[i] + distance(contour[i], contour[(i + 1) % n]);
  const double total = cum[n];
  Polyline out;
  out.reserve(m);
  std::size_t seg = 0;
  for (int k = 0; k < m; ++k) {
    const double s = total * k / m;
    while (seg + 1 < n && cum[seg + 1] <= s)
      ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    out.push_back(lerp(contour[seg], contour[(seg + 1) % n], t));
  }
  return out;
}

SpiralChoice spiral_connection_dp(std::span<const Polyline> samples) {
  SpiralChoice out;
  const std::size_t n = samples.size();
  if (n == 0)
    return out;
  std::vector<std::vector<double>> d(n);
  std::vector<std::vector<int>> from(n);
  d[0].assign(samples[0].size(), 0.0);
  from[0].assign(samples[0].size(), -1);
  for (std::size_t i = 1; i < n; ++i) {
    d[i].assign(samples[i].size(), std::numeric_limits<double>::infinity());
    from[i].assign(samples[i].size(), -1);
    for (std::size_t j = 0; j < samples[i].size(); ++j)
      for (std::size_t k = 0; k < samples[i - 1].size(); ++k) {
        const double c = d[i - 1][k] + distance(samples[i - 1][k], samples[i][j]);
        if (c < d[i][j]) {
          d[i][j] = c;
          from[i][j] = static_cast<int>(k);
        }
      }
  }
  int j = 0;
  for (std::size_t k = 1; k < d[n - 1].size(); ++k)
    if (d[n - 1][k] < d[n - 1][j])
      j = static_cast<int>(k);
  out.cost = d[n - 1][j];
  out.start.assign(n, 0);
  for (std::size_t i = n; i-- > 0;) {
    out.start[i] = j;
    j = from[i][j];
  }
  return out;
}

Toolpath spiralize_contours(std::span<const LayerPath> contours, int m) {
  Toolpath tp;
  if (contours.empty())
    return tp;
  if (contours.size() == 1) {
    const auto &c = contours[0];
    tp.vertices.push_back({c.points[0], false, 0.0, -1});
    for (std::size_t i = 1; i <= c.points.size(); ++i)
      tp.vertices.push_back({c.points[i % c.points.size()], true, c.thickness[i % c.points.size()], -1});
    return tp;
  }
  std::vector<Polyline> samples;
  for (const auto &c : contours)
    samples.push_back(resample_closed(counter_clockwise(c.points), m));
  const auto choice = spiral_connection_dp(samples);
  const std::size_t n = samples.size();
  auto at = [&](std::size_t i, int s) { return samples[i][(choice.start[i] + s) % m]; };

  tp.vertices.push_back({at(0, 0), false, 0.0, -1});
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double th = contours[i + 1].thickness.front();
    for (int s = 1; s <= m; ++s) {
      // Samples are arc-length uniform, so the travelled fraction is s / m.
      const double w = static_cast<double>(s) / m;
      tp.vertices.push_back({at(i + 1, s) * w + at(i, s) * (1.0 - w), true, th, -1});
    }
  }
  const double top_th = contours[n - 1].thickness.front();
  for (int s = 1; s <= m; ++s)
    tp.vertices.push_back({at(n - 1, s), true, top_th, -1});
  return tp;
}

std::vector<LowSlopeRegion> detect_low_slope_regions(std::span<const Polyline> contours, int m,
                                                     double threshold_deg) {
  std::vector<LowSlopeRegion> out;
  for (std::size_t i = 0; i + 1 < contours.size(); ++i) {
    const Polyline lower = resample_closed(contours[i], m);
    const Polyline upper = resample_closed(contours[i + 1], m);
    double max_angle = 0.0;
    for (const Point &p : lower) {
      const Point *best = &upper[0];
      for (const Point &q : upper)
        if (distance(p, q) < distance(p, *best))
          best = &q;
      const double angle =
          std::atan2(std::abs(best->z - p.z), horizontal_distance(p, *best)) * 180.0 / std::numbers::pi;
      max_angle = std::max(max_angle, angle);
    }
    if (max_angle < threshold_deg - 1e-9)
      out.push_back({static_cast<int>(i), max_angle});
  }
  return out;
}

} // namespace acap
