#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rotlab/dynamics.hpp"
#include "rotlab/geometry.hpp"

namespace rotlab::pseudo_orbit {

using dynamics::LiftedMap;
using geometry::RegionLabel;
using geometry::RegionMode;
using geometry::RotationTarget;
using geometry::TorusPoint;
using geometry::Vec2;

struct PseudoPeriodicOrbit {
  std::vector<TorusPoint> points;
  double epsilon = 0.0;
  Vec2 lift_displacement;  // integer-valued
  Vec2 candidate_vector;   // lift_displacement / period

  std::size_t period() const { return points.size(); }
};

// Builds the orbit record for a cyclic point list: the lift displacement
// is the sum over junctions of the integer offsets of the nearest lifts.
PseudoPeriodicOrbit make_pseudo_orbit(const LiftedMap& f, std::vector<TorusPoint> points, double eps);

struct GapCheck {
  double max_gap = 0.0;
  Vec2 lift_displacement;
  bool ok = false;  // every gap < epsilon and displacement matches
};
// independent re-check against raw map evaluation
GapCheck check_gaps(const LiftedMap& f, const PseudoPeriodicOrbit& orbit);

struct Ball {
  TorusPoint center;
  double radius = 0.0;
};

struct RecurrentCandidate {
  TorusPoint point;
  std::vector<long> return_times;
  std::vector<double> return_distances;
  std::vector<Vec2> return_displacements;  // f^n(z) - z in the lift
};

struct RecurrenceOptions {
  int max_returns = 8;
  int attempts_per_candidate = 4;
  double disjoint_radius = 1e-6;
  std::uint64_t seed = 1;
};

std::vector<RecurrentCandidate> find_recurrent_points(const LiftedMap& f, const Ball& region, double eps,
                                                      long max_horizon, int count,
                                                      const RecurrenceOptions& opts = {});

// Throws SearchExhausted when no return below eps occurs within max_horizon.
PseudoPeriodicOrbit detect_pseudo_periodic(const LiftedMap& f, TorusPoint start, double eps, long max_horizon);

enum class RKMode { Forward, Backward };

struct RKCandidate {
  TorusPoint point;
  long horizon = 0;
  double recurrence_gap = 0.0;
  double deviation_gain = 0.0;  // pr_t(f^n z - z - n t) forward, pr_t(f^n z - z) backward
  Vec2 lift_displacement;       // f^n(z) - z
};

struct RKSearchOptions {
  std::optional<TorusPoint> start;   // default: first grid start
  std::optional<double> gap_bound;   // default 1/K
  // Pair every orbit point, not only the level-crossing waypoints.
  bool dense = false;
  int max_candidates = 8;
};

// Walks one orbit for `budget` steps. Waypoints are the first passages of the
// cumulative parallel deviation through the levels K, 2K, ... (-K, -2K, ...
// backward); two waypoints within the gap bound form a candidate.
std::vector<RKCandidate> search_rk_candidates(const LiftedMap& f, const RotationTarget& target, double K,
                                              long budget, RKMode mode, const RKSearchOptions& opts = {});

// deviation_gain recomputed by iterating from the candidate point
double recompute_deviation_gain(const LiftedMap& f, const RotationTarget& target, const RKCandidate& c, RKMode mode);

struct SigmaResult {
  bool found = false;
  TorusPoint point;
  int level_used = 0;
  std::vector<long> composition;  // the return times summed
  double distance = 0.0;
};

SigmaResult sigma_limit_search(const LiftedMap& f, TorusPoint z, const std::vector<long>& return_times, int level,
                               double eps0, long budget);

// --- pseudo-orbits with prescribed region labels -------------------------

// First return of `start` within eps whose candidate vector has the label.
std::optional<PseudoPeriodicOrbit> find_labelled_return(const LiftedMap& f, TorusPoint start,
                                                        const RotationTarget& target, double eps, RegionLabel label,
                                                        long max_horizon, RegionMode mode = RegionMode::Segment);

// Rational vectors v = (a,b)/n with |v - t| < gap_bound and the wanted label,
// n <= max_period, ordered by decreasing region margin.
struct DriftCandidate {
  long period;
  Vec2 lift_displacement;
  double margin;
};
std::vector<DriftCandidate> uniform_drift_candidates(const RotationTarget& target, double gap_bound, RegionLabel label,
                                                     long max_period, std::size_t keep = 8);

// The same vectors in increasing period with margin >= min_margin (one per
// period, the largest margin), stopping after `keep`.
std::vector<DriftCandidate> shortest_drift_candidates(const RotationTarget& target, double gap_bound,
                                                      RegionLabel label, long max_period, double min_margin,
                                                      std::size_t keep = 4);

// The orbit of `start` for c.period steps with the mismatch D = f^n(start) -
// start - (a,b) absorbed by J = ceil(|D| / junction_gap) evenly spaced
// corrections of -D/J; every other step is exact. A correction may slide
// within half the spacing to the first step where junction_ok(from, to)
// accepts its path. Throws SearchExhausted when a gap reaches eps or the
// displacement is not (a,b).
PseudoPeriodicOrbit drift_pseudo_orbit(const LiftedMap& f, Vec2 start, const DriftCandidate& c, double eps,
                                       double junction_gap,
                                       const std::function<bool(Vec2, Vec2)>& junction_ok = {});

}  // namespace rotlab::pseudo_orbit
