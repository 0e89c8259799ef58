#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "acap/geometry.hpp"
#include "acap/opp_graph.hpp"
#include "acap/toolpath.hpp"

namespace fixtures {

using acap::Dag;
using acap::Point;
using acap::Polyline;
using acap::SurfaceModel;

SurfaceModel profile(const std::string &name, const std::vector<std::pair<double, double>> &outer);
SurfaceModel rectangle(double width, double height);
/// Stem splitting into two arms at z = 20; the inner shoulders run up to the top corners.
SurfaceModel gentle_y();
/// Same stem, shoulders too steep to curve.
SurfaceModel steep_y();
/// Two legs joined by a slab: towers under a shared dome.
SurfaceModel arch();
/// Horizontal bar on a stem.
SurfaceModel t_shape();
/// A shelf hanging over a lower block with a gap between them.
SurfaceModel overhang_above_material();
SurfaceModel two_towers(double gap, double height);
/// Stem with three arms; the outer shoulders are gentle.
SurfaceModel trident();
/// Gentle Y scaled to the fdm nozzle.
SurfaceModel small_y();
SurfaceModel scaled(SurfaceModel m, double factor);
/// Base with three teeth; 100 layers at 1mm and fewer than 300 elements.
SurfaceModel comb();

/// Open tube of `segments` facets.
SurfaceModel cylinder_mesh(double radius, double height, int segments);
/// Open cone frustum.
SurfaceModel cone_mesh(double r_bottom, double r_top, double height, int segments);

/// Profiles used for audits over "every fixture".
std::vector<SurfaceModel> profile_corpus();

/// Edges i -> j (i < j after a random relabelling) with probability `density`.
Dag random_dag(int n, double density, std::mt19937_64 &rng, double collision_fraction = 0.0);

/// Drops an edge iff another path joins its endpoints.
Dag brute_force_reduction(const Dag &g);

/// Minimum summed exit-to-entry distance over all 2^L entry choices.
double brute_force_zigzag(const std::vector<Polyline> &layers);

/// Minimum summed distance over all m^n connecting-point choices.
double brute_force_spiral(const std::vector<Polyline> &samples);

/// Circle of `m` points at height z.
Polyline circle(double radius, double z, int m, double phase = 0.0);

} // namespace fixtures
