#pragma once

#include <iosfwd>
#include <string>

#include "acap/geometry.hpp"

namespace acap {

/// Profile documents list loops of (x z) vertex pairs in mm:
///
///     name <model name>
///     loop outer|hole
///     x z
///     ...
///     end
///
/// Blank lines and '#' comments are ignored. Loops are re-oriented so outers
/// run counter-clockwise and holes clockwise in the XZ plane.
SurfaceModel read_profile(std::istream &in, const std::string &name = "profile");
void write_profile(std::ostream &out, const SurfaceModel &model);

/// ASCII or binary STL; duplicate vertices are welded.
SurfaceModel read_stl(std::istream &in, const std::string &name = "mesh");
/// Wavefront OBJ (v / f records; polygon faces are fanned).
SurfaceModel read_obj(std::istream &in, const std::string &name = "mesh");
void write_stl_ascii(std::ostream &out, const SurfaceModel &model);

/// Picks a reader by extension (.profile/.txt, .stl, .obj).
SurfaceModel load_model(const std::string &path);

} // namespace acap
