#include "acap/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <json.hpp>

namespace acap {

namespace {

class StageClock {
public:
  explicit StageClock(std::vector<StageTiming> &out) : out_(out), start_(std::chrono::steady_clock::now()) {}
  void lap(const char *stage) {
    const auto now = std::chrono::steady_clock::now();
    out_.push_back({stage, std::chrono::duration<double>(now - start_).count()});
    start_ = now;
  }

private:
  std::vector<StageTiming> &out_;
  std::chrono::steady_clock::time_point start_;
};

Point normalized(const Point &p) {
  const double n = p.norm();
  if (!(n > 0.0))
    throw Error("build direction must be non-zero");
  return p * (1.0 / n);
}

/// Rodrigues rotation taking unit vector u onto +z.
Point rotate_to_z(const Point &p, const Point &u) {
  const Point z{0.0, 0.0, 1.0};
  const Point axis{u.y * z.z - u.z * z.y, u.z * z.x - u.x * z.z, u.x * z.y - u.y * z.x};
  const double s = axis.norm();
  const double c = u.z;
  if (s < 1e-12)
    return c > 0.0 ? p : Point{p.x, -p.y, -p.z};
  const Point k = axis * (1.0 / s);
  const Point kxp{k.y * p.z - k.z * p.y, k.z * p.x - k.x * p.z, k.x * p.y - k.y * p.x};
  const double kdp = k.x * p.x + k.y * p.y + k.z * p.z;
  return p * c + kxp * s + k * (kdp * (1.0 - c));
}

bool orientation_printable(const SurfaceModel &model, const PrinterConfig &cfg, SupportReport *support) {
  const auto slope = compute_slope_limits(cfg.nozzle, model.xy_extent());
  auto report = support_feasible(model, slope, cfg.flat_layer_thickness, cfg.path_width);
  const bool ok = report.feasible;
  if (support)
    *support = std::move(report);
  if (!ok)
    return false;
  try {
    const auto sliced = slice_model(model, cfg.flat_layer_thickness, cfg.path_width);
    add_collision_edges(build_dep_graph(sliced, cfg.path_width), sliced, cfg.nozzle,
                        RibbonModel{cfg.path_width / 2.0, cfg.flat_layer_thickness});
  } catch (const UnprintableOrientation &) {
    return false;
  }
  return true;
}

} // namespace

SurfaceModel orient_model(const SurfaceModel &model, const Point &up) {
  SurfaceModel out = model;
  if (model.mode == ModelMode::profile2d) {
    const Point u = normalized(Point{up.x, 0.0, up.z});
    for (auto &loop : out.profile)
      for (auto &p : loop.vertices)
        p = Point{p.x * u.z - p.z * u.x, 0.0, p.x * u.x + p.z * u.z};
    return out;
  }
  const Point u = normalized(up);
  for (auto &p : out.mesh.vertices)
    p = rotate_to_z(p, u);
  return out;
}

std::vector<Point> candidate_directions(const SurfaceModel &model, int count) {
  std::vector<Point> out{{0.0, 0.0, 1.0}};
  if (count <= 1)
    return out;
  if (model.mode == ModelMode::profile2d) {
    for (int k = 1; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * k / count;
      out.push_back({std::sin(a), 0.0, std::cos(a)});
    }
    return out;
  }
  // Fibonacci sphere.
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count - 1; ++k) {
    const double z = 1.0 - 2.0 * (k + 0.5) / (count - 1);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.push_back({r * std::cos(golden * k), r * std::sin(golden * k), z});
  }
  return out;
}

std::string PlanReport::to_json(bool with_timings) const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["mode"] = mode;
  j["preset"] = preset;
  j["seed"] = seed;
  j["layers"] = layers;
  j["dep_nodes"] = dep_nodes;
  j["dep_edges"] = dep_edges;
  j["collision_edges"] = collision_edges;
  j["init_nodes"] = init_nodes;
  j["#OF"] = flat_opps;
  j["#OO"] = curved_opps;
  j["transfer_count"] = transfer_count;
  j["total_path_length_mm"] = total_path_length;
  j["transfer_length_mm"] = transfer_length;
  j["estimated_time_s"] = estimated_time;
  j["support_regions"] = support_regions;
  j["low_slope_regions"] = low_slope_regions;
  j["build_direction"] = {build_direction.x, build_direction.y, build_direction.z};
  if (with_timings) {
    nlohmann::ordered_json t;
    for (const auto &s : timings)
      t[s.stage] = s.seconds;
    j["timings_s"] = t;
  }
  return j.dump(2);
}

PipelineResult run_pipeline(const SurfaceModel &input, const PrinterConfig &cfg, const PipelineOptions &opts) {
  cfg.validate();
  input.validate();
  PipelineResult r;
  PlanReport &rep = r.report;
  rep.model = input.name;
  rep.mode = input.mode == ModelMode::profile2d ? "profile2d" : "mesh3d";
  rep.preset = cfg.name;
  rep.seed = cfg.rng_seed;
  StageClock clock(rep.timings);

  r.model = input;
  if (opts.orientation_search) {
    bool found = false;
    for (const Point &dir : candidate_directions(input, opts.orientation_candidates)) {
      SurfaceModel oriented = orient_model(input, dir);
      if (orientation_printable(oriented, cfg, &r.support)) {
        r.model = std::move(oriented);
        rep.build_direction = dir;
        found = true;
        break;
      }
    }
    if (!found)
      throw InfeasibleOrientation("no sampled build direction is printable", r.support);
  } else {
    const auto slope = compute_slope_limits(cfg.nozzle, input.xy_extent());
    r.support = support_feasible(input, slope, cfg.flat_layer_thickness, cfg.path_width);
    if (!r.support.feasible)
      throw InfeasibleOrientation(fmt::format("orientation needs support inside the model at {} sample points",
                                              r.support.violations.size()),
                                  r.support);
  }
  rep.support_regions = static_cast<int>(r.support.regions.size());
  clock.lap("support");

  r.sliced = slice_model(r.model, cfg.flat_layer_thickness, cfg.path_width);
  rep.layers = static_cast<int>(r.sliced.layers.size());
  clock.lap("slice");

  const DepGraph geometric = build_dep_graph(r.sliced, cfg.path_width);
  r.dep = add_collision_edges(geometric, r.sliced, cfg.nozzle,
                              RibbonModel{cfg.path_width / 2.0, cfg.flat_layer_thickness});
  rep.dep_nodes = r.dep.size();
  rep.dep_edges = r.dep.edge_count();
  for (const auto &e : r.dep.edges())
    rep.collision_edges += e.kind == EdgeKind::collision;
  clock.lap("dep_graph");

  r.init = build_init_graph(r.dep, r.sliced.elements);
  const InitGraph collision_free = build_init_graph(geometric, r.sliced.elements);
  rep.init_nodes = r.init.dag.size();
  clock.lap("init_graph");

  std::vector<FlatOppGraph> covers;
  if (r.init.dag.size() > 0) {
    BeamSearchOptions beam;
    beam.beam_width = cfg.beam_width;
    covers = beam_search_path_covers(r.init.dag, beam);
    if (covers.empty())
      throw Error("beam search found no path cover");
    r.flat = covers.front();
  }
  rep.flat_opps = r.flat ? r.flat->size() : 0;
  clock.lap("flat_merge");

  const auto slope = compute_slope_limits(cfg.nozzle, r.model.xy_extent());
  MergeContext ctx{r.sliced, r.dep, r.init, {cfg.t_min, cfg.t_max, slope.max_tan()}};
  ctx.path_width = cfg.path_width;
  ctx.connect_threshold = cfg.connect_threshold;
  ctx.curving_enabled = opts.curving && r.model.mode == ModelMode::profile2d;
  ctx.collision_free_init = &collision_free;
  std::vector<CurvedOppGraph> merged;
  for (std::size_t i = 0; i < covers.size(); ++i)
    merged.push_back(pairwise_merge(curved_graph_from_flat(covers[i], ctx), ctx, cfg.rng_seed + i));
  if (!merged.empty())
    r.curved = select_best(merged);
  rep.curved_opps = r.curved.size();
  clock.lap("curved_merge");

  r.order = order_opps(r.curved);
  std::vector<Toolpath> toolpaths;
  for (int id : r.order) {
    const OppPatch &patch = r.curved.patches[id];
    toolpaths.push_back(patch_toolpath(patch, r.sliced, cfg));
    const auto layers = patch_layers(patch, r.sliced, cfg.flat_layer_thickness);
    std::vector<Polyline> contours;
    auto flush = [&] {
      for (auto region : detect_low_slope_regions(contours, cfg.contour_samples))
        r.low_slope.push_back(region);
      contours.clear();
    };
    for (const auto &layer : layers) {
      if (!layer.closed)
        flush();
      else
        contours.push_back(layer.points);
    }
    flush();
  }
  rep.low_slope_regions = static_cast<int>(r.low_slope.size());
  clock.lap("toolpath");

  r.plan = plan_transfers(std::move(toolpaths), 2.0 * cfg.t_max, cfg.speed);
  if (cfg.spacing_iterations > 0) {
    SpacingOptions sp;
    sp.target = cfg.flat_layer_thickness;
    sp.iterations = cfg.spacing_iterations;
    sp.limits = ctx.limits;
    sp.max_displacement = cfg.path_width;
    r.plan = optimize_spacing(r.plan, sp);
  }
  rep.transfer_count = r.plan.stats.transfer_count;
  rep.total_path_length = r.plan.stats.total_extruded_length;
  rep.transfer_length = r.plan.stats.transfer_length;
  rep.estimated_time = r.plan.stats.estimated_time;
  clock.lap("plan");
  return r;
}

} // namespace acap
