#include "acap/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace acap {

PrinterConfig ceramic_preset() {
  PrinterConfig c;
  c.name = "ceramic";
  c.t_min = 0.5;
  c.t_max = 2.5;
  c.flat_layer_thickness = 1.0;
  c.path_width = 6.0;
  c.connect_threshold = 5.0;
  c.speed = 25.0;
  c.nozzle.length = 90.0;
  c.nozzle.outlet_radius = 2.6;
  c.nozzle.reference_thickness = 1.5;
  return c;
}

PrinterConfig fdm_preset() {
  PrinterConfig c;
  c.name = "fdm";
  c.t_min = 0.05;
  c.t_max = 0.7;
  c.flat_layer_thickness = 0.2;
  c.path_width = 1.5;
  c.connect_threshold = 2.0;
  c.speed = 25.0;
  c.nozzle.length = 8.0;
  c.nozzle.outlet_radius = 0.5;
  c.nozzle.reference_thickness = 0.35;
  return c;
}

std::vector<std::string> preset_names() { return {"ceramic", "fdm"}; }

PrinterConfig preset(const std::string &name) {
  if (name == "ceramic")
    return ceramic_preset();
  if (name == "fdm")
    return fdm_preset();
  throw Error(fmt::format("unknown preset '{}' (known: ceramic, fdm)", name));
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T> T parse_number(const std::string &key, const std::string &text) {
  T v{};
  const char *end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end)
    throw Error(fmt::format("{}: cannot parse '{}' as a number", key, text));
  return v;
}

using Setter = std::function<void(PrinterConfig &, const std::string &)>;

template <typename T> Setter field(T PrinterConfig::*member, const char *key) {
  return [member, key](PrinterConfig &c, const std::string &v) { c.*member = parse_number<T>(key, v); };
}

template <typename T> Setter nozzle_field(T NozzleModel::*member, const char *key) {
  return [member, key](PrinterConfig &c, const std::string &v) { c.nozzle.*member = parse_number<T>(key, v); };
}

const std::map<std::string, Setter> &setters() {
  static const std::map<std::string, Setter> table = {
      {"name", [](PrinterConfig &c, const std::string &v) { c.name = v; }},
      {"t_min", field(&PrinterConfig::t_min, "t_min")},
      {"t_max", field(&PrinterConfig::t_max, "t_max")},
      {"layer_thickness", field(&PrinterConfig::flat_layer_thickness, "layer_thickness")},
      {"path_width", field(&PrinterConfig::path_width, "path_width")},
      {"connect_threshold", field(&PrinterConfig::connect_threshold, "connect_threshold")},
      {"beam_width", field(&PrinterConfig::beam_width, "beam_width")},
      {"speed", field(&PrinterConfig::speed, "speed")},
      {"extrusion_coefficient", field(&PrinterConfig::extrusion_coefficient, "extrusion_coefficient")},
      {"seed", field(&PrinterConfig::rng_seed, "seed")},
      {"contour_samples", field(&PrinterConfig::contour_samples, "contour_samples")},
      {"spacing_iterations", field(&PrinterConfig::spacing_iterations, "spacing_iterations")},
      {"nozzle_length", nozzle_field(&NozzleModel::length, "nozzle_length")},
      {"nozzle_diameter",
       [](PrinterConfig &c, const std::string &v) {
         c.nozzle.outlet_radius = parse_number<double>("nozzle_diameter", v) / 2.0;
       }},
      {"nozzle_cone_angle", nozzle_field(&NozzleModel::cone_angle_deg, "nozzle_cone_angle")},
      {"reference_thickness", nozzle_field(&NozzleModel::reference_thickness, "reference_thickness")},
      {"carriage_radius", nozzle_field(&NozzleModel::carriage_radius, "carriage_radius")},
  };
  return table;
}

} // namespace

PrinterConfig parse_config(std::istream &in, const std::string &source) {
  PrinterConfig cfg = ceramic_preset();
  std::string line;
  int lineno = 0;
  bool seen_key = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(fmt::format("{}:{}: expected 'key = value'", source, lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "preset") {
      if (seen_key)
        throw Error(fmt::format("{}:{}: preset must precede other keys", source, lineno));
      cfg = preset(value);
      seen_key = true;
      continue;
    }
    seen_key = true;
    const auto it = setters().find(key);
    if (it == setters().end())
      throw Error(fmt::format("{}:{}: unknown key '{}'", source, lineno, key));
    try {
      it->second(cfg, value);
    } catch (const Error &e) {
      throw Error(fmt::format("{}:{}: {}", source, lineno, e.what()));
    }
  }
  cfg.validate();
  return cfg;
}

PrinterConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(fmt::format("cannot open config '{}'", path));
  return parse_config(in, path);
}

PrinterConfig resolve_config(const std::string &preset_or_path) {
  for (const auto &n : preset_names())
    if (n == preset_or_path)
      return preset(n);
  if (std::filesystem::exists(preset_or_path))
    return load_config(preset_or_path);
  throw Error(fmt::format("'{}' is neither a preset nor a config file", preset_or_path));
}

void write_config(std::ostream &out, const PrinterConfig &c) {
  out << fmt::format("name = {}\n", c.name) << fmt::format("t_min = {}\n", c.t_min)
      << fmt::format("t_max = {}\n", c.t_max) << fmt::format("layer_thickness = {}\n", c.flat_layer_thickness)
      << fmt::format("path_width = {}\n", c.path_width)
      << fmt::format("connect_threshold = {}\n", c.connect_threshold)
      << fmt::format("beam_width = {}\n", c.beam_width) << fmt::format("speed = {}\n", c.speed)
      << fmt::format("extrusion_coefficient = {}\n", c.extrusion_coefficient)
      << fmt::format("seed = {}\n", c.rng_seed) << fmt::format("contour_samples = {}\n", c.contour_samples)
      << fmt::format("spacing_iterations = {}\n", c.spacing_iterations)
      << fmt::format("nozzle_length = {}\n", c.nozzle.length)
      << fmt::format("nozzle_diameter = {}\n", 2.0 * c.nozzle.outlet_radius)
      << fmt::format("nozzle_cone_angle = {}\n", c.nozzle.cone_angle_deg)
      << fmt::format("reference_thickness = {}\n", c.nozzle.reference_thickness)
      << fmt::format("carriage_radius = {}\n", c.nozzle.carriage_radius);
}

} // namespace acap
