#pragma once

#include <array>
#include <cstdint>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace acap {

/// Raised for malformed models, configs and other caller errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point operator+(const Point &o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point operator-(const Point &o) const { return {x - o.x, y - o.y, z - o.z}; }
  Point operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Point &) const = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double horizontal_norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(const Point &a, const Point &b) { return (a - b).norm(); }
inline double horizontal_distance(const Point &a, const Point &b) { return (a - b).horizontal_norm(); }
inline Point lerp(const Point &a, const Point &b, double t) { return a + (b - a) * t; }

using Polyline = std::vector<Point>;

double polyline_length(std::span<const Point> pts, bool closed = false);

/// Minimum distance between the horizontal projections of two segments.
double horizontal_segment_distance(const Point &a0, const Point &a1, const Point &b0, const Point &b1);

/// Minimum horizontal distance from a point to a polyline (closing edge included when closed).
double horizontal_point_polyline_distance(const Point &p, std::span<const Point> pts, bool closed);

// ---------------------------------------------------------------------------
// Models

enum class ModelMode { profile2d, mesh3d };

/// One loop of a profile polygon in the XZ plane (y is always 0).
struct ProfileLoop {
  std::vector<Point> vertices;
  bool hole = false;
};

struct TriangleMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
};

struct SurfaceModel {
  ModelMode mode = ModelMode::profile2d;
  std::string name;
  std::vector<ProfileLoop> profile;
  TriangleMesh mesh;

  bool empty() const;
  double min_z() const;
  double max_z() const;
  /// Largest horizontal extent of the bounding box (diagonal of its XY footprint).
  double xy_extent() const;
  /// Throws Error when loops self-intersect, indices are out of range or coordinates are not finite.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Slicing

enum class ElementKind { segment, contour };

/// A connected intersection component of one slicing plane with the model.
/// Contours are stored without repeating their first point.
struct LayerElement {
  int id = -1;
  int layer_index = 0;
  double z = 0.0;
  ElementKind kind = ElementKind::segment;
  Polyline points;
  bool degenerate = false;

  bool closed() const { return kind == ElementKind::contour; }
  double length() const { return polyline_length(points, closed()); }
  double min_x() const;
  double max_x() const;
};

/// Elements indexed by id; `layers[i]` lists the ids sliced at layer i.
struct SlicedModel {
  double thickness = 0.0;
  double base_z = 0.0;
  std::vector<LayerElement> elements;
  std::vector<std::vector<int>> layers;

  double layer_z(int layer) const { return base_z + (layer + 0.5) * thickness; }
};

/// Slices at z = base + (i + 0.5) * thickness. Elements shorter than
/// 0.25 * path_width are flagged degenerate (pass 0 to disable).
SlicedModel slice_model(const SurfaceModel &model, double thickness, double path_width = 0.0);

/// Exact minimum distance between the z-dropped projections of two elements.
double element_distance(const LayerElement &a, const LayerElement &b);

// ---------------------------------------------------------------------------
// Nozzle, slope and collision

struct NozzleModel {
  double outlet_radius = 2.6;   // w
  double length = 90.0;         // h, tip to carriage
  double cone_angle_deg = 75.0; // angle between the cone side and the horizontal
  double reference_thickness = 1.5;
  double carriage_radius = 0.0; // 0 selects 10 * outlet_radius

  double carriage_extent() const { return carriage_radius > 0.0 ? carriage_radius : 10.0 * outlet_radius; }
  /// Radius of the swept nozzle solid at height dz above the tip.
  double radius_at(double dz) const;
  void validate() const;
};

struct SlopeLimits {
  double nozzle_deg = 90.0;
  double object_deg = 90.0;
  double outlet_deg = 90.0;
  double max_deg = 90.0;

  double max_tan() const;
};

SlopeLimits compute_slope_limits(const NozzleModel &nozzle, double object_extent);

/// Printer and planner parameters; see config.hpp for presets and file loading.
struct PrinterConfig {
  std::string name = "ceramic";
  double t_min = 0.5;
  double t_max = 2.5;
  double flat_layer_thickness = 1.0;
  double path_width = 6.0;
  double connect_threshold = 5.0; // D
  int beam_width = 10000;
  double speed = 25.0; // mm/s
  NozzleModel nozzle;
  double extrusion_coefficient = 1.0;
  std::uint64_t rng_seed = 0;
  int contour_samples = 100;
  int spacing_iterations = 0;

  /// One message per violated constraint, naming the field.
  std::vector<std::string> problems() const;
  void validate() const;
};

/// Printed material around an element: horizontal half width and vertical thickness.
struct RibbonModel {
  double half_width = 3.0;
  double thickness = 1.0;
};

/// True when moving the nozzle tip along `printing` would hit the already deposited `printed`.
bool nozzle_collides(const LayerElement &printing, const LayerElement &printed, const NozzleModel &nozzle,
                     const RibbonModel &ribbon);

// ---------------------------------------------------------------------------
// Support

struct SupportRegion {
  int layer_index = 0;
  /// Sample points (on the model) whose downward rays reach the ground.
  Polyline footprint;
  /// Height of the region above the model base.
  double height = 0.0;
};

struct SupportReport {
  bool feasible = true;
  std::vector<SupportRegion> regions;
  /// Sample points whose downward ray hits the model below the adjacent layer.
  std::vector<Point> violations;
};

SupportReport support_feasible(const SurfaceModel &model, const SlopeLimits &slope, double layer_thickness,
                               double sample_spacing);

} // namespace acap
