#include "rotlab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

#include "rotlab/error.hpp"
#include "rotlab/numeric.hpp"
#include "rotlab/point_index.hpp"

namespace rotlab::chain {

using dynamics::OrbitState;
using geometry::dot;
using geometry::torus_distance;

namespace {

constexpr double kDisjoint = 1e-6;

struct Frame {
  Vec2 t;   // (a, b)
  Vec2 th;  // unit (a, b)
  Vec2 wh;  // unit (-b, a)
};

Frame frame_of(const RotationTarget& target) {
  Vec2 t = target.vec();
  double n = t.norm();
  return {t, t / n, target.perp() / n};
}

double par_of(const Frame& F, Vec2 d, long len, RegionMode mode) {
  if (mode == RegionMode::Segment) d -= static_cast<double>(len) * F.t;
  return dot(d, F.th);
}

OrbitSegment trace_segment(const LiftedMap& f, const Frame& F, TorusPoint start, long len, Vec2 start_lift,
                           RegionMode mode) {
  if (len < 1) throw Error(ErrorKind::InvalidArgument, "chain", "segment length must be >= 1");
  OrbitSegment s;
  s.anchor = start;
  s.n_start = 0;
  s.n_end = len;
  s.start_lift = start_lift;
  s.points.reserve(static_cast<std::size_t>(len));
  OrbitState st = OrbitState::at(start.vec());
  for (long n = 0; n < len; ++n) {
    s.points.push_back(st.torus());
    dynamics::step(f, st);
  }
  Vec2 d = st.offset + (st.pos - start.vec());
  s.end_lift = start_lift + d;
  s.perp_drift = dot(d, F.wh);
  s.par_deviation = par_of(F, d, len, mode);
  return s;
}

ChainState finish(const RotationTarget& target, double eps, RegionMode mode, std::vector<OrbitSegment> segs) {
  const Frame F = frame_of(target);
  ChainState c;
  c.target = target;
  c.mode = mode;
  c.epsilon = eps;
  c.segments = std::move(segs);
  const std::size_t S = c.segments.size();
  if (S == 0) throw Error(ErrorKind::InvalidArgument, "chain", "no segments");

  Vec2 first = c.segments.front().start_lift;
  Vec2 last = c.segments.back().end_lift;
  c.lift_displacement = geometry::nearest_integer_vector(geometry::nearest_lift(last, first) - first);

  Accumulator perp, m2;
  long period = 0;
  c.closed = true;
  for (std::size_t k = 0; k < S; ++k) {
    const OrbitSegment& s = c.segments[k];
    perp.add(s.perp_drift);
    if (!s.large) m2.add(s.par_deviation);
    period += s.length();
    JunctionRecord j;
    j.from = k;
    j.to = (k + 1) % S;
    j.source_lift = s.end_lift;
    j.destination_lift = k + 1 < S ? c.segments[k + 1].start_lift : first + c.lift_displacement;
    Vec2 d = j.destination_lift - j.source_lift;
    j.gap = d.norm();
    j.perp_jump = dot(d, F.wh);
    j.par_jump = dot(d, F.th);
    c.closed = c.closed && j.gap < eps;
    c.junctions.push_back(j);
  }
  c.cumulative_perp_drift = perp.value();
  c.cumulative_par_deviation = m2.value();
  c.period = period;
  c.label = geometry::classify_region(target, c.candidate_vector(), geometry::kRegionTolerance, mode);
  c.region_margin = geometry::region_coordinates(target, c.candidate_vector(), mode).margin();
  return c;
}

Vec2 random_in_ball(std::mt19937_64& rng, Vec2 c, double r) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double rho = r * std::sqrt(u(rng)), th = 2.0 * 3.14159265358979323846 * u(rng);
  return {c.x + rho * std::cos(th), c.y + rho * std::sin(th)};
}

bool clashes(const geometry::TorusPointIndex& used, const std::vector<TorusPoint>& pts) {
  if (used.size() == 0) return false;
  for (TorusPoint p : pts)
    if (used.any_within(p.vec(), kDisjoint)) return true;
  return false;
}

bool self_disjoint(const std::vector<TorusPoint>& a, const std::vector<TorusPoint>& b) {
  geometry::TorusPointIndex idx(1.0 / 1024);
  for (TorusPoint p : a) idx.insert(p.vec(), 0);
  return !clashes(idx, b);
}

void insert_all(geometry::TorusPointIndex& used, const std::vector<TorusPoint>& pts) {
  for (TorusPoint p : pts) used.insert(p.vec(), 0);
}

// single-segment loops y .. f^{n-1} y near x* with a wanted label, one per
// start and label
struct LoopCandidate {
  RegionLabel label;
  int start_index;
  SegmentRequest req;
};

std::vector<LoopCandidate> single_loops(const LiftedMap& f, const RotationTarget& target, TorusPoint x_star,
                                        double radius, const std::vector<RegionLabel>& wanted, RegionMode mode,
                                        const ChainBudgets& b, std::mt19937_64& rng, bool need_pair) {
  std::vector<LoopCandidate> out;
  // without a pair the loops accompany a ladder whose large segment already
  // runs through x*
  for (int k = need_pair ? 0 : 1; k < b.case_one_starts; ++k) {
    Vec2 y0 = k == 0 ? x_star.vec() : random_in_ball(rng, x_star.vec(), 0.9 * radius);
    TorusPoint y = TorusPoint::from(y0);
    std::vector<bool> have(wanted.size(), false);
    OrbitState s = OrbitState::at(y.vec());
    for (long n = 1; n <= b.case_one_horizon; ++n) {
      dynamics::step(f, s);
      if (torus_distance(s.pos, x_star.vec()) >= radius) continue;
      Vec2 L = geometry::nearest_integer_vector(s.offset + (s.pos - y.vec()));
      RegionLabel l = geometry::classify_region(target, L / static_cast<double>(n), geometry::kRegionTolerance, mode);
      for (std::size_t w = 0; w < wanted.size(); ++w)
        if (!have[w] && l == wanted[w]) {
          have[w] = true;
          out.push_back({l, k, {y, n, false}});
        }
      if (std::all_of(have.begin(), have.end(), [](bool v) { return v; })) break;
    }
    if (!need_pair) {
      if (out.size() >= 4) break;
      continue;
    }
    // a pair of distinct starts covering both labels ends the search
    bool a = false, c = false;
    for (auto& lc : out) {
      if (lc.label == wanted[0]) a = true;
      if (wanted.size() > 1 && lc.label == wanted[1]) c = true;
    }
    if (a && c) {
      for (auto& p : out)
        for (auto& q : out)
          if (p.label == wanted[0] && q.label == wanted[1] && p.start_index != q.start_index) return out;
    }
  }
  return out;
}

RegionLabel other_label(RegionLabel l, RegionMode mode) {
  auto [a, b] = goal_labels(mode);
  return l == a ? b : a;
}

}  // namespace

Vec2 ChainState::candidate_vector() const {
  return period > 0 ? lift_displacement / static_cast<double>(period) : Vec2{0.0, 0.0};
}

double ChainState::ledger_perp() const {
  Accumulator a;
  for (const auto& s : segments) a.add(s.perp_drift);
  for (const auto& j : junctions) a.add(j.perp_jump);
  return a.value();
}

double ChainState::ledger_par() const {
  Accumulator a;
  for (const auto& s : segments) a.add(s.par_deviation);
  for (const auto& j : junctions) a.add(j.par_jump);
  return a.value();
}

double ChainState::total_perp() const { return dot(lift_displacement, frame_of(target).wh); }

double ChainState::total_par() const {
  return par_of(frame_of(target), lift_displacement, period, mode);
}

std::pair<RegionLabel, RegionLabel> goal_labels(RegionMode mode) {
  if (mode == RegionMode::Segment) return {RegionLabel::Delta0, RegionLabel::Omega0};
  return {RegionLabel::D0, RegionLabel::D1};
}

ChainState assemble_chain(const LiftedMap& f, const RotationTarget& target,
                          const std::vector<SegmentRequest>& segments, double eps, RegionMode mode) {
  const Frame F = frame_of(target);
  std::vector<OrbitSegment> segs;
  segs.reserve(segments.size());
  for (const auto& r : segments) {
    Vec2 lift = segs.empty() ? r.start.vec() : geometry::nearest_lift(segs.back().end_lift, r.start.vec());
    segs.push_back(trace_segment(f, F, r.start, r.length, lift, mode));
    segs.back().large = r.large;
  }
  return finish(target, eps, mode, std::move(segs));
}

PseudoPeriodicOrbit to_pseudo_orbit(const LiftedMap& f, const ChainState& c) {
  std::vector<TorusPoint> pts;
  pts.reserve(static_cast<std::size_t>(c.period));
  for (const auto& s : c.segments) pts.insert(pts.end(), s.points.begin(), s.points.end());
  PseudoPeriodicOrbit o = pseudo_orbit::make_pseudo_orbit(f, std::move(pts), c.epsilon);
  if (o.lift_displacement != c.lift_displacement)
    throw Error(ErrorKind::SearchExhausted, "chain", "recomputed lift displacement disagrees with the ledger");
  return o;
}

ChainResult chain_segments(const LiftedMap& f, const RotationTarget& target, double eps, const ChainOptions& opts) {
  if (!(eps > 0.0 && eps <= 0.5)) throw Error(ErrorKind::InvalidArgument, "chain", "eps must lie in (0, 1/2]");
  const Frame F = frame_of(target);
  const ChainTuning& tu = opts.tuning;
  const ChainBudgets& bu = opts.budgets;
  const RegionMode mode = opts.mode;
  const double ball = eps * tu.ball;
  std::mt19937_64 rng(opts.seed);
  ChainResult res;

  // x*: a point of R_K (R'_K about the origin) with a return within the ball
  {
    pseudo_orbit::RKSearchOptions so;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    so.start = TorusPoint::from({u(rng), u(rng)});
    so.gap_bound = 0.95 * ball;
    so.dense = true;
    so.max_candidates = 16;
    auto rkmode = mode == RegionMode::Segment ? pseudo_orbit::RKMode::Forward : pseudo_orbit::RKMode::Backward;
    auto cands = pseudo_orbit::search_rk_candidates(f, target, bu.rk_K, bu.rk_budget, rkmode, so);
    bool found = false;
    for (const auto& c : cands) {
      bool near = std::any_of(opts.avoid.begin(), opts.avoid.end(),
                              [&](Vec2 a) { return torus_distance(a, c.point.vec()) < eps; });
      if (near) continue;
      res.x_star = c.point;
      res.x_star_gain = c.deviation_gain;
      found = true;
      break;
    }
    if (!found)
      throw Error(ErrorKind::SearchExhausted, "large-deviation",
                  "no recurrent point with deviation beyond K within the budget");
  }
  const TorusPoint xs = res.x_star;
  auto [labA, labB] = goal_labels(mode);

  // Case One: both labels among single returns near x*
  std::vector<LoopCandidate> loops;
  if (opts.strategy != ChainStrategy::LadderOnly) {
    loops = single_loops(f, target, xs, eps / 2, {labA, labB}, mode, bu, rng, true);
    for (const auto& p : loops)
      for (const auto& q : loops) {
        if (p.label != labA || q.label != labB || p.start_index == q.start_index) continue;
        ChainState A = assemble_chain(f, target, {p.req}, eps, mode);
        ChainState B = assemble_chain(f, target, {q.req}, eps, mode);
        if (!A.closed || !B.closed || A.label != labA || B.label != labB) continue;
        if (!self_disjoint(A.segments[0].points, B.segments[0].points)) continue;
        res.used = ChainCase::CaseOne;
        res.chains = {std::move(A), std::move(B)};
        return res;
      }
    if (opts.strategy == ChainStrategy::CaseOneOnly)
      throw Error(ErrorKind::SearchExhausted, "recurrent-search", "no disjoint pair of single returns with both labels");
  }

  // Case Two: the ladder
  RegionLabel lab = labB;
  if (opts.ladder_label) {
    lab = *opts.ladder_label;
  } else if (!loops.empty()) {
    bool hasA = false, hasB = false;
    for (auto& l : loops) (l.label == labA ? hasA : hasB) = true;
    if (hasB && !hasA) lab = labA;
  }
  if (lab != labA && lab != labB)
    throw Error(ErrorKind::InvalidArgument, "chain", "ladder label does not belong to the goal");
  const RegionLabel companion = other_label(lab, mode);
  const double sigma = (lab == RegionLabel::Omega0 || lab == RegionLabel::D1) ? -1.0 : 1.0;
  const Vec2 o = sigma * eps * tu.offset * F.wh;
  const double steer = eps * tu.steer;

  // planned wrap-around: N steps of size m'/N, |m'/N - o| <= steer
  int N = 0;
  Vec2 mprime;
  for (int n = 2; n <= bu.max_ladder_steps + 1; ++n) {
    Vec2 no = static_cast<double>(n) * o;
    Vec2 m = geometry::nearest_integer_vector(no);
    if ((m - no).norm() <= static_cast<double>(n) * steer) {
      N = n;
      mprime = m;
      break;
    }
  }
  if (N == 0) throw Error(ErrorKind::SearchExhausted, "small-displacement", "no wrap-around within the step budget");
  const Vec2 step = mprime / static_cast<double>(N);

  geometry::TorusPointIndex used(1.0 / 1024);
  std::vector<OrbitSegment> segs;
  const Vec2 x0 = xs.vec();
  Vec2 prev_end = x0;
  int K0 = 0;
  struct Return {
    long n;
    Vec2 L;
    Vec2 pos;
  };
  for (int i = 1; i <= bu.max_ladder_steps && K0 == 0; ++i) {
    Vec2 T = prev_end + o;
    Vec2 Q = x0 + static_cast<double>(i) * step;
    Vec2 d = geometry::torus_delta(T, Q);
    if (d.norm() > steer) d = d * (steer / d.norm());
    const Vec2 P = T + d;
    const Vec2 Qn = x0 + static_cast<double>(i + 1) * step;
    bool any_returns = false, accepted = false;
    for (int attempt = 0; attempt < bu.start_attempts && !accepted; ++attempt) {
      TorusPoint z0 = TorusPoint::from(attempt == 0 ? P : random_in_ball(rng, P, eps * tu.start_ball));
      std::vector<Return> R{{0, {0.0, 0.0}, z0.vec()}};
      OrbitState s = OrbitState::at(z0.vec());
      for (long n = 1; n <= bu.recurrence_horizon && static_cast<int>(R.size()) <= bu.max_returns; ++n) {
        dynamics::step(f, s);
        if (torus_distance(s.pos, z0.vec()) < ball) R.push_back({n, s.offset + (s.pos - z0.vec()), s.pos});
      }
      if (R.size() < 2) continue;
      any_returns = true;
      // the recorded tail supremum: a minimizes sigma pr_w over all but the last return
      std::size_t a = 0;
      for (std::size_t k = 1; k + 1 < R.size(); ++k)
        if (sigma * dot(R[k].L, F.wh) < sigma * dot(R[a].L, F.wh)) a = k;
      Vec2 start_lift = geometry::nearest_lift(T, R[a].pos);
      std::optional<std::size_t> best;
      std::tuple<int, int, int, double> best_key;
      for (std::size_t k = a + 1; k < R.size(); ++k) {
        double drift = dot(R[k].L - R[a].L, F.wh);
        if (!(sigma * drift > -ball)) continue;
        Vec2 end = start_lift + (R[k].L - R[a].L);
        int stop = torus_distance(end + o, x0) < ball ? 0 : 1;
        int small = std::abs(drift) < ball ? 0 : 1;
        // shortest segment that tracks the plan within the steering bound
        double err = torus_distance(end + o, Qn);
        int off_plan = err < steer ? 0 : 1;
        auto key = std::make_tuple(stop, small, off_plan, off_plan ? err : static_cast<double>(R[k].n - R[a].n));
        if (!best || key < best_key) {
          best = k;
          best_key = key;
        }
      }
      if (!best) continue;
      OrbitSegment seg = trace_segment(f, F, TorusPoint::from(R[a].pos), R[*best].n - R[a].n, start_lift, mode);
      seg.anchor = z0;
      seg.n_start = R[a].n;
      seg.n_end = R[*best].n;
      if (clashes(used, seg.points)) continue;
      insert_all(used, seg.points);
      prev_end = seg.end_lift;
      if (std::get<0>(best_key) == 0) K0 = i;
      segs.push_back(std::move(seg));
      accepted = true;
    }
    if (!accepted) {
      if (!any_returns)
        throw Error(ErrorKind::SearchExhausted, "recurrent-search", "no return to the start ball at ladder step " +
                                                                        std::to_string(i));
      throw Error(ErrorKind::SearchExhausted, "small-displacement",
                  "no return pair with small perpendicular drift at ladder step " + std::to_string(i));
    }
  }
  if (K0 == 0) throw Error(ErrorKind::SearchExhausted, "small-displacement", "the ladder did not wrap around");

  // the large-deviation segment from x*
  {
    Accumulator m2;
    for (const auto& s : segs) m2.add(s.par_deviation);
    const double need = std::abs(m2.value()) + eps * static_cast<double>(K0 + 1);
    OrbitState s = OrbitState::at(x0);
    long len = 0;
    for (long n = 1; n <= bu.large_budget; ++n) {
      dynamics::step(f, s);
      if (torus_distance(s.pos, x0) >= ball) continue;
      Vec2 L = s.offset + (s.pos - x0);
      if (!(sigma * dot(L, F.wh) > -ball)) continue;
      double dev = par_of(F, L, n, mode);
      if (mode == RegionMode::Segment ? dev > need : dev < -need) {
        len = n;
        break;
      }
    }
    if (len == 0)
      throw Error(ErrorKind::SearchExhausted, "large-deviation",
                  "no return of x* with deviation beyond |M2| + eps (K0 + 1) within the budget");
    Vec2 lift = geometry::nearest_lift(prev_end + o, x0);
    OrbitSegment big = trace_segment(f, F, xs, len, lift, mode);
    big.large = true;
    if (clashes(used, big.points))
      throw Error(ErrorKind::SearchExhausted, "large-deviation", "large segment meets a ladder orbit");
    insert_all(used, big.points);
    segs.push_back(std::move(big));
  }

  ChainState ladder = finish(target, eps, mode, std::move(segs));
  if (!ladder.closed) throw Error(ErrorKind::SearchExhausted, "small-displacement", "a junction gap exceeds eps");
  if (ladder.label != lab)
    throw Error(ErrorKind::SearchExhausted, "region-check",
                std::string("ladder loop is labelled ") + std::string(geometry::to_string(ladder.label)));
  res.used = ChainCase::Ladder;
  res.ladder_steps = K0;
  res.chains.push_back(std::move(ladder));

  // companion loop with the other label, disjoint from the ladder
  std::vector<LoopCandidate> comp;
  for (const auto& l : loops)
    if (l.label == companion) comp.push_back(l);
  if (comp.empty()) comp = single_loops(f, target, xs, eps / 2, {companion}, mode, bu, rng, false);
  for (const auto& c : comp) {
    ChainState C = assemble_chain(f, target, {c.req}, eps, mode);
    if (!C.closed || C.label != companion || clashes(used, C.segments[0].points)) continue;
    res.chains.push_back(std::move(C));
    break;
  }
  return res;
}

}  // namespace rotlab::chain
