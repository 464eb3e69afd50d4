#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rotlab/dynamics.hpp"
#include "rotlab/geometry.hpp"
#include "rotlab/pseudo_orbit.hpp"

namespace rotlab::chain {

using dynamics::LiftedMap;
using geometry::RegionLabel;
using geometry::RegionMode;
using geometry::RotationTarget;
using geometry::TorusPoint;
using geometry::Vec2;
using pseudo_orbit::PseudoPeriodicOrbit;

// An orbit segment z_n .. z_{n'} of one recurrent start. Projections use the
// unit vectors t/|t| and w/|w|, w = (-b, a).
struct OrbitSegment {
  std::vector<TorusPoint> points;  // z_n .. z_{n'-1}
  Vec2 start_lift;                 // z_n in chain coordinates
  Vec2 end_lift;                   // z_{n'}
  long n_start = 0;
  long n_end = 0;
  TorusPoint anchor;  // z_0
  bool large = false;
  double perp_drift = 0.0;     // pr_w(end - start)
  double par_deviation = 0.0;  // pr_t(end - start - len t), or pr_t(end - start) about the origin

  long length() const { return n_end - n_start; }
};

// Junction k joins the end of segment k to the start of segment k+1
// (cyclically; the last one closes the loop through an integer shift).
struct JunctionRecord {
  std::size_t from = 0;
  std::size_t to = 0;
  Vec2 source_lift;
  Vec2 destination_lift;
  double gap = 0.0;
  double perp_jump = 0.0;
  double par_jump = 0.0;
};

struct ChainState {
  std::vector<OrbitSegment> segments;
  std::vector<JunctionRecord> junctions;
  RotationTarget target;
  RegionMode mode = RegionMode::Segment;
  double epsilon = 0.0;
  double cumulative_perp_drift = 0.0;     // over all segments
  double cumulative_par_deviation = 0.0;  // M2: over the non-large segments
  bool closed = false;                    // every junction gap < epsilon
  Vec2 lift_displacement;                 // integer shift closing the loop
  long period = 0;
  RegionLabel label = RegionLabel::Boundary;
  double region_margin = 0.0;

  Vec2 candidate_vector() const;
  // sums of the recorded drifts/deviations and jumps
  double ledger_perp() const;
  double ledger_par() const;
  // the same quantities computed from lift_displacement
  double total_perp() const;
  double total_par() const;
};

struct SegmentRequest {
  TorusPoint start;
  long length = 1;
  bool large = false;
};

// Builds the loop of the given segments in order, lifting each start to the
// planar point nearest to the previous end.
ChainState assemble_chain(const LiftedMap& f, const RotationTarget& target,
                          const std::vector<SegmentRequest>& segments, double eps,
                          RegionMode mode = RegionMode::Segment);

// Concatenated points; throws if the independently recomputed lift
// displacement disagrees with the ledger.
PseudoPeriodicOrbit to_pseudo_orbit(const LiftedMap& f, const ChainState& c);

// Fractions of eps.
struct ChainTuning {
  double offset = 0.5;     // ladder step along w
  double ball = 1.0 / 16;  // return balls, perpendicular drift bound
  double junction = 1.0 / 8;
  double steer = 1.0 / 32;   // per-step correction toward the planned positions
  double start_ball = 1.0 / 64;
};

struct ChainBudgets {
  double rk_K = 2.0;
  long rk_budget = 2'000'000;
  long recurrence_horizon = 400'000;
  int max_returns = 12;
  int start_attempts = 8;
  int max_ladder_steps = 400;
  long case_one_horizon = 200'000;
  int case_one_starts = 32;
  long large_budget = 4'000'000;
};

enum class ChainStrategy { Auto, CaseOneOnly, LadderOnly };
enum class ChainCase { CaseOne, Ladder };

struct ChainOptions {
  ChainTuning tuning;
  ChainBudgets budgets;
  ChainStrategy strategy = ChainStrategy::Auto;
  RegionMode mode = RegionMode::Segment;
  // label the ladder produces; default Omega0 (segment) or D1 (origin)
  std::optional<RegionLabel> ladder_label;
  // x* is kept at least eps away from these (e.g. known fixed points)
  std::vector<Vec2> avoid;
  std::uint64_t seed = 1;
};

struct ChainResult {
  ChainCase used = ChainCase::CaseOne;
  TorusPoint x_star;
  double x_star_gain = 0.0;
  // CaseOne: the two single-segment loops. Ladder: the ladder loop, then the
  // companion loop when one was found.
  std::vector<ChainState> chains;
  int ladder_steps = 0;  // K0
};

// Stages reported on failure: large-deviation, recurrent-search,
// small-displacement, ladder-plan, region-check.
ChainResult chain_segments(const LiftedMap& f, const RotationTarget& target, double eps,
                           const ChainOptions& opts = {});

// the two labels of the goal: {Delta0, Omega0} or {D0, D1}
std::pair<RegionLabel, RegionLabel> goal_labels(RegionMode mode);

}  // namespace rotlab::chain
