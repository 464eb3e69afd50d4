#pragma once

#include <cstdint>
#include <vector>

#include "rotlab/dynamics.hpp"
#include "rotlab/pseudo_orbit.hpp"

namespace rotlab::closing {

using dynamics::BumpMove;
using dynamics::CompositePerturbation;
using dynamics::LiftedMap;
using dynamics::MapPtr;
using geometry::Vec2;
using pseudo_orbit::PseudoPeriodicOrbit;

struct ClosingOptions {
  double zero_gap = 1e-12;        // junctions below this need no move
  double radius_fraction = 0.25;  // support radius <= fraction * eps
  double max_radius = 0.2;
  double clearance_factor = 0.45;   // radius <= factor * clearance to other points
  double jitter_fraction = 0.1;     // midpoint offsets up to fraction * eps
  int retries = 100;
  int max_submoves = 4096;
  bool avoid_fixed_points = true;   // the map's known fixed points stay outside the supports
  std::vector<Vec2> forbidden;      // further points kept outside the supports
  std::uint64_t seed = 1;
};

// One move per junction with a nonzero gap: it carries the image f(x_i) to
// the lift of x_{i+1} nearest to it.
struct ClosingJunction {
  std::size_t orbit = 0;
  std::size_t index = 0;  // i
  Vec2 source;
  Vec2 destination;
};

struct ClosingPlan {
  std::vector<PseudoPeriodicOrbit> orbits;
  std::vector<ClosingJunction> junctions;
  std::vector<BumpMove> moves;  // paths and radii, parallel to junctions
  double epsilon = 0.0;
  double total_c0 = 0.0;
  double min_clearance = 0.0;  // over supports: distance to the nearest foreign point minus the radius
};

// Errors: Closing for coincident points, gaps >= eps or disjointness failure.
ClosingPlan plan_closing(const LiftedMap& f, std::vector<PseudoPeriodicOrbit> orbits, double eps,
                         const ClosingOptions& opts = {});

struct PlacementOptions {
  double junction_fraction = 0.8;    // junction gap as a fraction of eps
  double separation_fraction = 0.125;  // minimum distance between junction paths, fraction of eps
  int trials = 256;                  // random starts per orbit
  std::uint64_t seed = 1;
};

// One drift pseudo-orbit per candidate, built in order: starts are drawn at
// random and corrections slide so that every junction path keeps the
// separation from the paths already placed. Throws SearchExhausted
// ("placement") when an orbit finds no admissible start.
std::vector<PseudoPeriodicOrbit> place_drift_orbits(const LiftedMap& f,
                                                   const std::vector<pseudo_orbit::DriftCandidate>& candidates,
                                                   double eps, const PlacementOptions& opts = {});

struct PeriodicOrbitRecord {
  std::vector<geometry::TorusPoint> points;
  long period = 0;
  Vec2 lift_displacement;  // integer
  Vec2 rational_vector;    // lift_displacement / period
};

struct ClosedSystem {
  MapPtr original;
  CompositePerturbation perturbation;
  MapPtr map;  // g
  std::vector<PeriodicOrbitRecord> periodic_orbits;
  double epsilon = 0.0;
};

ClosedSystem execute_closing(MapPtr f, const ClosingPlan& plan);

// g rebuilt from its parts, e.g. after reloading or tampering
ClosedSystem make_closed_system(MapPtr f, CompositePerturbation pert, std::vector<PeriodicOrbitRecord> orbits,
                                double eps);

struct VerifyOptions {
  int samples = 10000;
  double grid_fraction = 1.0 / 50;  // support grid spacing as a fraction of the radius
  int max_tube_steps = 100;         // cap on grid steps along one path segment
  int threads = 1;
  std::uint64_t seed = 5;
};

struct VerifyReport {
  double c0_distance = 0.0;  // sampled sup |g - f|
  double declared_c0 = 0.0;
  std::vector<double> closure_errors;  // lift error after one period, per orbit
  double max_closure_error = 0.0;
  double locality_error = 0.0;  // max |g - f| on samples whose image is outside the supports
  double inverse_error = 0.0;   // max |g^-1(g(z)) - z|, uniform and support-focused samples
  double fixed_point_error = 0.0;
  long support_samples = 0;
};

VerifyReport verify_closed_system(const ClosedSystem& sys, const LiftedMap& original,
                                  const VerifyOptions& opts = {});

}  // namespace rotlab::closing
