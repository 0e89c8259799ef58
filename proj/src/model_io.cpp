#include "acap/model_io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace acap {

namespace {

double signed_area_xz(const std::vector<Point> &v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point &p = v[i];
    const Point &q = v[(i + 1) % v.size()];
    a += p.x * q.z - q.x * p.z;
  }
  return 0.5 * a;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class VertexWelder {
public:
  explicit VertexWelder(TriangleMesh &mesh) : mesh_(mesh) {}

  int add(const Point &p) {
    const auto key = std::array<double, 3>{p.x, p.y, p.z};
    auto [it, inserted] = index_.try_emplace(key, static_cast<int>(mesh_.vertices.size()));
    if (inserted)
      mesh_.vertices.push_back(p);
    return it->second;
  }

private:
  TriangleMesh &mesh_;
  std::map<std::array<double, 3>, int> index_;
};

void add_triangle(TriangleMesh &mesh, int a, int b, int c) {
  if (a == b || b == c || a == c)
    return; // collapsed by welding
  mesh.triangles.push_back({a, b, c});
}

SurfaceModel read_stl_binary(const std::string &data, const std::string &name) {
  if (data.size() < 84)
    throw Error("binary STL is truncated");
  std::uint32_t count = 0;
  std::memcpy(&count, data.data() + 80, 4);
  if (data.size() < 84 + static_cast<std::size_t>(count) * 50)
    throw Error(fmt::format("binary STL declares {} triangles but is truncated", count));
  SurfaceModel model;
  model.mode = ModelMode::mesh3d;
  model.name = name;
  VertexWelder weld(model.mesh);
  for (std::uint32_t t = 0; t < count; ++t) {
    const char *rec = data.data() + 84 + static_cast<std::size_t>(t) * 50 + 12;
    int idx[3];
    for (int v = 0; v < 3; ++v) {
      float xyz[3];
      std::memcpy(xyz, rec + v * 12, 12);
      idx[v] = weld.add({xyz[0], xyz[1], xyz[2]});
    }
    add_triangle(model.mesh, idx[0], idx[1], idx[2]);
  }
  return model;
}

SurfaceModel read_stl_ascii(const std::string &data, const std::string &name) {
  SurfaceModel model;
  model.mode = ModelMode::mesh3d;
  model.name = name;
  VertexWelder weld(model.mesh);
  std::istringstream in(data);
  std::string word;
  std::vector<int> facet;
  while (in >> word) {
    if (word == "vertex") {
      Point p;
      if (!(in >> p.x >> p.y >> p.z))
        throw Error("ASCII STL: malformed vertex record");
      facet.push_back(weld.add(p));
    } else if (word == "endfacet") {
      if (facet.size() != 3)
        throw Error("ASCII STL: facet without exactly three vertices");
      add_triangle(model.mesh, facet[0], facet[1], facet[2]);
      facet.clear();
    }
  }
  return model;
}

} // namespace

SurfaceModel read_profile(std::istream &in, const std::string &name) {
  SurfaceModel model;
  model.mode = ModelMode::profile2d;
  model.name = name;
  std::string line;
  int line_no = 0;
  ProfileLoop *current = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "name") {
      std::string rest;
      std::getline(ls, rest);
      model.name = trim(rest);
    } else if (head == "units") {
      std::string unit;
      ls >> unit;
      if (unit != "mm")
        throw Error(fmt::format("profile line {}: only mm units are supported", line_no));
    } else if (head == "loop") {
      if (current)
        throw Error(fmt::format("profile line {}: nested loop", line_no));
      std::string flag;
      ls >> flag;
      if (flag != "outer" && flag != "hole")
        throw Error(fmt::format("profile line {}: loop flag must be outer or hole", line_no));
      model.profile.push_back({{}, flag == "hole"});
      current = &model.profile.back();
    } else if (head == "end") {
      if (!current)
        throw Error(fmt::format("profile line {}: end without loop", line_no));
      current = nullptr;
    } else {
      if (!current)
        throw Error(fmt::format("profile line {}: vertex outside a loop", line_no));
      Point p;
      std::istringstream vs(line);
      if (!(vs >> p.x >> p.z))
        throw Error(fmt::format("profile line {}: expected 'x z'", line_no));
      current->vertices.push_back(p);
    }
  }
  if (current)
    throw Error("profile: unterminated loop");
  for (auto &loop : model.profile) {
    const double area = signed_area_xz(loop.vertices);
    if ((area < 0.0) != loop.hole)
      std::reverse(loop.vertices.begin(), loop.vertices.end());
  }
  model.validate();
  return model;
}

void write_profile(std::ostream &out, const SurfaceModel &model) {
  out << "name " << model.name << "\nunits mm\n";
  for (const auto &loop : model.profile) {
    out << "loop " << (loop.hole ? "hole" : "outer") << '\n';
    for (const auto &p : loop.vertices)
      out << fmt::format("{} {}\n", p.x, p.z);
    out << "end\n";
  }
}

SurfaceModel read_stl(std::istream &in, const std::string &name) {
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  // "solid" headers also occur in binary files; trust the size equation first.
  if (data.size() >= 84) {
    std::uint32_t count = 0;
    std::memcpy(&count, data.data() + 80, 4);
    if (data.size() == 84 + static_cast<std::size_t>(count) * 50)
      return read_stl_binary(data, name);
  }
  if (data.rfind("solid", 0) == 0)
    return read_stl_ascii(data, name);
  return read_stl_binary(data, name);
}

SurfaceModel read_obj(std::istream &in, const std::string &name) {
  SurfaceModel model;
  model.mode = ModelMode::mesh3d;
  model.name = name;
  std::vector<Point> raw;
  VertexWelder weld(model.mesh);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "v") {
      Point p;
      if (!(ls >> p.x >> p.y >> p.z))
        throw Error("OBJ: malformed vertex");
      raw.push_back(p);
    } else if (head == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        int i = std::stoi(tok.substr(0, tok.find('/')));
        if (i < 0)
          i = static_cast<int>(raw.size()) + i + 1;
        if (i < 1 || i > static_cast<int>(raw.size()))
          throw Error(fmt::format("OBJ: face references missing vertex {}", i));
        idx.push_back(weld.add(raw[i - 1]));
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        add_triangle(model.mesh, idx[0], idx[k], idx[k + 1]);
    }
  }
  model.validate();
  return model;
}

void write_stl_ascii(std::ostream &out, const SurfaceModel &model) {
  out << "solid " << model.name << '\n';
  for (const auto &t : model.mesh.triangles) {
    out << "  facet normal 0 0 0\n    outer loop\n";
    for (int v : t) {
      const Point &p = model.mesh.vertices[v];
      out << fmt::format("      vertex {} {} {}\n", p.x, p.y, p.z);
    }
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid " << model.name << '\n';
}

SurfaceModel load_model(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(fmt::format("cannot open model '{}'", path));
  const std::filesystem::path p(path);
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  const std::string stem = p.stem().string();
  if (ext == ".stl")
    return read_stl(in, stem);
  if (ext == ".obj")
    return read_obj(in, stem);
  SurfaceModel m = read_profile(in, stem);
  return m;
}

} // namespace acap
