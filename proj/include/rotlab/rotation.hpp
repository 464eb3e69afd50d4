#pragma once

#include <optional>
#include <vector>

#include "rotlab/dynamics.hpp"
#include "rotlab/geometry.hpp"

namespace rotlab::rotation {

using dynamics::LiftedMap;
using geometry::ConvexPolygon;
using geometry::Vec2;

struct DisplacementSample {
  Vec2 start;
  long horizon = 1;
  Vec2 mean_displacement;
};

// A start sampled at its own horizons (e.g. multiples of a known period).
struct ExtraStart {
  Vec2 point;
  std::vector<long> horizons;  // empty: the standard horizons
};

struct HullOptions {
  std::vector<ExtraStart> extra_starts;
  // the map's known fixed points join the starts
  bool include_fixed_points = true;
  int threads = 1;
  bool keep_samples = false;
};

struct RotationHull {
  ConvexPolygon hull;
  long horizon = 0;
  int grid_density = 0;
  std::vector<DisplacementSample> samples;  // filled when keep_samples
};

// {horizon/4, horizon/2, horizon}, positive and distinct
std::vector<long> standard_horizons(long horizon);
// grid x grid starts ((i + a/7)/grid, (j + b/7)/grid) with (a, b) the default
// irrational pair
std::vector<Vec2> grid_starts(int grid);

RotationHull estimate_rotation_hull(const LiftedMap& f, int grid_density, long horizon,
                                    const HullOptions& opts = {});
// One orbit pass serving several estimates; result k equals
// estimate_rotation_hull(f, grid_density, horizons[k], opts).
std::vector<RotationHull> estimate_rotation_hulls(const LiftedMap& f, int grid_density,
                                                  const std::vector<long>& horizons,
                                                  const HullOptions& opts = {});

Vec2 orbit_rotation_vector(const LiftedMap& f, Vec2 start, long horizon);

struct TraceRow {
  long n;
  Vec2 lift;
  Vec2 displacement;  // f^n(z) - z
};
std::vector<TraceRow> trace_orbit(const LiftedMap& f, Vec2 start, long horizon, long every = 1);

enum class Verdict { BoundedUpTo, GrowthDetected };

struct DeviationOptions {
  double growth_threshold = 0.2;  // slope of running sup against log2 n
  int min_doublings = 5;
  int threads = 1;
};

struct DeviationCheckpoint {
  long n;
  double sup;
};

struct DeviationReport {
  Vec2 direction;
  double sup_deviation = 0.0;
  Vec2 argmax_start;
  long argmax_horizon = 0;
  Verdict verdict = Verdict::BoundedUpTo;
  long bounded_up_to = 0;  // N of BoundedUpTo(N)
  double rate = 0.0;       // fitted slope (the rate of GrowthDetected)
  double hull_support = 0.0;
  std::vector<DeviationCheckpoint> checkpoints;  // n = 2^k and max_horizon
};

DeviationReport measure_deviation(const LiftedMap& f, const ConvexPolygon& hull, Vec2 direction,
                                  int grid_density, long max_horizon, const DeviationOptions& opts = {});
inline DeviationReport measure_deviation(const LiftedMap& f, const RotationHull& hull, Vec2 direction,
                                         int grid_density, long max_horizon, const DeviationOptions& opts = {}) {
  return measure_deviation(f, hull.hull, direction, grid_density, max_horizon, opts);
}
// several directions from one orbit pass
std::vector<DeviationReport> measure_deviations(const LiftedMap& f, const ConvexPolygon& hull,
                                                const std::vector<Vec2>& directions, int grid_density,
                                                long max_horizon, const DeviationOptions& opts = {});

// least-squares slope of checkpoint sups against log2 n over every
// power-of-two checkpoint; nullopt with fewer than min_doublings doublings
std::optional<double> growth_slope(const std::vector<DeviationCheckpoint>& cps, int min_doublings);

}  // namespace rotlab::rotation
