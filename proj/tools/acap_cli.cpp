#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "acap/config.hpp"
#include "acap/flat_merge.hpp"
#include "acap/gcode.hpp"
#include "acap/model_io.hpp"
#include "acap/opp_graph.hpp"
#include "acap/pipeline.hpp"
#include "acap/svg.hpp"

namespace fs = std::filesystem;
using namespace acap;

namespace {

struct RunArgs {
  std::string model;
  std::string config = "ceramic";
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> beam_width;
  bool orient = false;
  bool no_curving = false;
};

void add_run_options(CLI::App *cmd, RunArgs &a) {
  cmd->add_option("model", a.model, "profile (.profile/.txt), STL or OBJ file")->required();
  cmd->add_option("--config", a.config, "preset name (ceramic, fdm) or config file");
  cmd->add_option("--mode", a.mode, "expected model mode")->check(CLI::IsMember({"profile2d", "mesh3d"}));
  cmd->add_option("--seed", a.seed, "random seed for curved merging");
  cmd->add_option("--beam-width", a.beam_width, "beam width of the path cover search");
  cmd->add_flag("--orient", a.orient, "search sampled build directions for a printable one");
  cmd->add_flag("--no-curving", a.no_curving, "flat layers only");
}

PipelineResult run(const RunArgs &a, PrinterConfig &cfg) {
  cfg = resolve_config(a.config);
  if (a.seed)
    cfg.rng_seed = *a.seed;
  if (a.beam_width)
    cfg.beam_width = *a.beam_width;
  cfg.validate();
  SurfaceModel model = load_model(a.model);
  const std::string mode = model.mode == ModelMode::profile2d ? "profile2d" : "mesh3d";
  if (!a.mode.empty() && a.mode != mode)
    throw Error(fmt::format("--mode {} does not match the {} model '{}'", a.mode, mode, a.model));
  PipelineOptions opts;
  opts.curving = !a.no_curving;
  opts.orientation_search = a.orient;
  return run_pipeline(model, cfg, opts);
}

void write_file(const fs::path &path, const std::string &text) {
  std::ofstream out(path);
  if (!out)
    throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

/// Group of each element for a pipeline stage.
std::vector<int> element_groups(const PipelineResult &r, const std::string &stage) {
  std::vector<int> group(r.sliced.elements.size(), -1);
  if (stage == "elements" || stage == "dep")
    return group;
  if (stage == "init") {
    for (std::size_t e = 0; e < group.size(); ++e)
      group[e] = r.init.owner[e];
    return group;
  }
  if (stage == "flat") {
    if (r.flat)
      for (int p = 0; p < r.flat->size(); ++p)
        for (int node : r.flat->paths[p])
          for (int e : r.init.chains[node])
            group[e] = p;
    return group;
  }
  for (const auto &patch : r.curved.patches)
    for (int e : patch.elements())
      group[e] = patch.id;
  return group;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Continuous toolpath planner for extrusion printing"};
  app.require_subcommand(1);

  RunArgs plan_args;
  std::string out_dir = ".";
  auto *plan = app.add_subcommand("plan", "write G-code, SVG and report");
  add_run_options(plan, plan_args);
  plan->add_option("--out", out_dir, "output directory");

  RunArgs stats_args;
  auto *stats = app.add_subcommand("stats", "print the report");
  add_run_options(stats, stats_args);

  RunArgs vis_args;
  std::string stage = "plan";
  std::string vis_out;
  auto *vis = app.add_subcommand("visualize", "SVG of one pipeline stage");
  vis->add_option("stage", stage, "elements, dep, init, flat, curved or plan")
      ->required()
      ->check(CLI::IsMember({"elements", "dep", "init", "flat", "curved", "plan"}));
  add_run_options(vis, vis_args);
  vis->add_option("--out", vis_out, "output file (default: stdout)");

  std::string graph_file;
  int max_nodes = 20;
  auto *oracle = app.add_subcommand("oracle", "exact minimum path cover of a graph file");
  oracle->add_option("graph", graph_file, "graph text file")->required()->check(CLI::ExistingFile);
  oracle->add_option("--max-nodes", max_nodes, "refuse larger graphs");

  CLI11_PARSE(app, argc, argv);

  try {
    PrinterConfig cfg;
    if (*plan) {
      const PipelineResult r = run(plan_args, cfg);
      fs::create_directories(out_dir);
      const std::string stem = fs::path(plan_args.model).stem().string();
      const fs::path base = fs::path(out_dir) / stem;
      write_file(base.string() + ".gcode", emit_gcode(r.plan, cfg, r.model.name).str());
      write_file(base.string() + ".svg", svg_plan(r.plan));
      write_file(base.string() + ".report.json", r.report.to_json() + "\n");
      std::cout << fmt::format("{}: #OF={} #OO={} transfers={} -> {}.{{gcode,svg,report.json}}\n", stem,
                               r.report.flat_opps, r.report.curved_opps, r.report.transfer_count, base.string());
    } else if (*stats) {
      std::cout << run(stats_args, cfg).report.to_json() << "\n";
    } else if (*vis) {
      const PipelineResult r = run(vis_args, cfg);
      std::string svg;
      if (stage == "plan") {
        svg = svg_plan(r.plan);
      } else {
        const auto groups = element_groups(r, stage);
        svg = svg_elements(r.sliced, groups, stage == "dep" ? &r.dep : nullptr);
      }
      if (vis_out.empty())
        std::cout << svg;
      else
        write_file(vis_out, svg);
    } else if (*oracle) {
      std::ifstream in(graph_file);
      const LabeledGraph g = read_graph(in);
      std::cout << exact_min_path_cover(g.dag, max_nodes).path_count << "\n";
    }
  } catch (const InfeasibleOrientation &e) {
    std::cerr << "error: " << e.what() << fmt::format(" ({} support regions)\n", e.support.regions.size());
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
