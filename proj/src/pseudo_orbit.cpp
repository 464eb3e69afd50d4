#include "rotlab/pseudo_orbit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "rotlab/error.hpp"
#include "rotlab/point_index.hpp"
#include "rotlab/rotation.hpp"

namespace rotlab::pseudo_orbit {

using dynamics::OrbitState;
using geometry::torus_distance;

PseudoPeriodicOrbit make_pseudo_orbit(const LiftedMap& f, std::vector<TorusPoint> points, double eps) {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "pseudo_orbit", "empty point list");
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "pseudo_orbit", "eps must be positive");
  PseudoPeriodicOrbit o;
  o.epsilon = eps;
  Vec2 total{0.0, 0.0};
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 w = dynamics::evaluate(f, points[i].vec());
    Vec2 next = points[(i + 1) % n].vec();
    total += geometry::nearest_integer_vector(geometry::nearest_lift(w, next) - next);
  }
  o.points = std::move(points);
  o.lift_displacement = total;
  o.candidate_vector = total / static_cast<double>(n);
  return o;
}

GapCheck check_gaps(const LiftedMap& f, const PseudoPeriodicOrbit& orbit) {
  GapCheck g;
  const std::size_t n = orbit.points.size();
  if (n == 0) return g;
  Vec2 total{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 w = dynamics::evaluate(f, orbit.points[i].vec());
    Vec2 next = orbit.points[(i + 1) % n].vec();
    Vec2 lift = geometry::nearest_lift(w, next);
    g.max_gap = std::max(g.max_gap, (lift - w).norm());
    total += geometry::nearest_integer_vector(lift - next);
  }
  g.lift_displacement = total;
  g.ok = g.max_gap < orbit.epsilon && total == orbit.lift_displacement;
  return g;
}

namespace {

Vec2 random_in_ball(std::mt19937_64& rng, Vec2 c, double r) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double rho = r * std::sqrt(u(rng)), th = 2.0 * 3.14159265358979323846 * u(rng);
  return {c.x + rho * std::cos(th), c.y + rho * std::sin(th)};
}

}  // namespace

std::vector<RecurrentCandidate> find_recurrent_points(const LiftedMap& f, const Ball& region, double eps,
                                                      long max_horizon, int count, const RecurrenceOptions& opts) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "recurrence", "eps must be positive");
  if (count < 1 || max_horizon < 1) return {};
  std::mt19937_64 rng(opts.seed);
  geometry::TorusPointIndex taken(std::max(opts.disjoint_radius, 1.0 / 1024));
  std::vector<RecurrentCandidate> accepted, fallback;
  int attempts = count * std::max(1, opts.attempts_per_candidate);
  for (int a = 0; a < attempts && static_cast<int>(accepted.size()) < count; ++a) {
    Vec2 p0 = a == 0 ? region.center.vec() : random_in_ball(rng, region.center.vec(), region.radius);
    TorusPoint start = TorusPoint::from(p0);
    RecurrentCandidate c;
    c.point = start;
    std::vector<Vec2> orbit{start.vec()};
    OrbitState s = OrbitState::at(start.vec());
    for (long n = 1; n <= max_horizon && static_cast<int>(c.return_times.size()) < opts.max_returns; ++n) {
      dynamics::step(f, s);
      double d = torus_distance(s.pos, start.vec());
      if (d < eps) {
        c.return_times.push_back(n);
        c.return_distances.push_back(d);
        c.return_displacements.push_back(s.lift() - start.vec());
      }
      if (static_cast<int>(c.return_times.size()) < opts.max_returns) orbit.push_back(s.pos);
    }
    if (c.return_times.empty()) continue;
    orbit.resize(static_cast<std::size_t>(c.return_times.back()));
    bool clash = false;
    for (Vec2 q : orbit)
      if (taken.any_within(q, opts.disjoint_radius)) {
        clash = true;
        break;
      }
    if (clash) {
      fallback.push_back(std::move(c));
      continue;
    }
    for (Vec2 q : orbit) taken.insert(q, static_cast<std::uint32_t>(accepted.size()));
    accepted.push_back(std::move(c));
  }
  for (auto& c : fallback) {
    if (static_cast<int>(accepted.size()) >= count) break;
    accepted.push_back(std::move(c));
  }
  return accepted;
}

PseudoPeriodicOrbit detect_pseudo_periodic(const LiftedMap& f, TorusPoint start, double eps, long max_horizon) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "pseudo_orbit", "eps must be positive");
  OrbitState s = OrbitState::at(start.vec());
  std::vector<TorusPoint> pts{start};
  for (long n = 1; n <= max_horizon; ++n) {
    dynamics::step(f, s);
    if (torus_distance(s.pos, start.vec()) < eps) {
      PseudoPeriodicOrbit o;
      o.points = std::move(pts);
      o.epsilon = eps;
      o.lift_displacement = geometry::nearest_integer_vector(s.lift() - start.vec());
      o.candidate_vector = o.lift_displacement / static_cast<double>(n);
      return o;
    }
    pts.push_back(s.torus());
  }
  throw Error(ErrorKind::SearchExhausted, "pseudo-orbit", "no return within eps up to the horizon");
}

namespace {

struct Record {
  long n;
  Vec2 offset;
  Vec2 pos;
};

double gain_between(const Record& a, const Record& b, Vec2 t, RKMode mode) {
  Vec2 L = (b.offset - a.offset) + (b.pos - a.pos);
  double g = geometry::dot(L, t);
  if (mode == RKMode::Forward) g -= static_cast<double>(b.n - a.n) * t.norm2();
  return g;
}

}  // namespace

std::vector<RKCandidate> search_rk_candidates(const LiftedMap& f, const RotationTarget& target, double K, long budget,
                                              RKMode mode, const RKSearchOptions& opts) {
  if (!(K > 0.0)) throw Error(ErrorKind::InvalidArgument, "rk-search", "K must be positive");
  const double gap = opts.gap_bound.value_or(1.0 / K);
  if (!(gap > 0.0)) throw Error(ErrorKind::InvalidArgument, "rk-search", "gap bound must be positive");
  const Vec2 t = target.vec();
  const double sign = mode == RKMode::Forward ? 1.0 : -1.0;
  const long cells = std::min(4096L, static_cast<long>(std::ceil(1.0 / gap)));
  const double cell = 1.0 / static_cast<double>(cells);
  auto key = [&](long i, long j) {
    i = ((i % cells) + cells) % cells;
    j = ((j % cells) + cells) % cells;
    return static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(cells) + static_cast<std::uint64_t>(j);
  };
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  std::vector<Record> recs;

  Vec2 z0 = opts.start ? opts.start->vec() : rotation::grid_starts(1).front();
  OrbitState s = OrbitState::at(z0);
  recs.push_back({0, s.offset, s.pos});
  buckets[key(static_cast<long>(s.pos.x / cell), static_cast<long>(s.pos.y / cell))].push_back(0);

  std::vector<RKCandidate> out;
  double level = K;  // next waypoint level for sign * deviation
  for (long n = 1; n <= budget && static_cast<int>(out.size()) < opts.max_candidates; ++n) {
    dynamics::step(f, s);
    Record cur{n, s.offset, s.pos};
    if (!opts.dense) {
      double dev = sign * gain_between(recs.front(), cur, t, mode);
      if (dev < level) continue;
      level = (std::floor(dev / K) + 1.0) * K;
    }
    long ci = static_cast<long>(cur.pos.x / cell), cj = static_cast<long>(cur.pos.y / cell);
    int best = -1;
    double best_gain = 0.0, best_gap = 0.0;
    for (long di = -1; di <= 1; ++di)
      for (long dj = -1; dj <= 1; ++dj) {
        auto it = buckets.find(key(ci + di, cj + dj));
        if (it == buckets.end()) continue;
        for (std::uint32_t k : it->second) {
          double d = torus_distance(recs[k].pos, cur.pos);
          if (d > gap) continue;
          double g = gain_between(recs[k], cur, t, mode);
          if (sign * g >= K && (best < 0 || sign * g > sign * best_gain)) {
            best = static_cast<int>(k);
            best_gain = g;
            best_gap = d;
          }
        }
      }
    if (best >= 0) {
      const Record& a = recs[static_cast<std::size_t>(best)];
      RKCandidate c;
      c.point = {a.pos.x, a.pos.y};
      c.horizon = n - a.n;
      c.recurrence_gap = best_gap;
      c.deviation_gain = best_gain;
      c.lift_displacement = (cur.offset - a.offset) + (cur.pos - a.pos);
      out.push_back(c);
    }
    buckets[key(ci, cj)].push_back(static_cast<std::uint32_t>(recs.size()));
    recs.push_back(cur);
  }
  return out;
}

double recompute_deviation_gain(const LiftedMap& f, const RotationTarget& target, const RKCandidate& c, RKMode mode) {
  OrbitState s = OrbitState::at(c.point.vec());
  for (long n = 0; n < c.horizon; ++n) dynamics::step(f, s);
  Record a{0, {0.0, 0.0}, c.point.vec()}, b{c.horizon, s.offset, s.pos};
  return gain_between(a, b, target.vec(), mode);
}

SigmaResult sigma_limit_search(const LiftedMap& f, TorusPoint z, const std::vector<long>& return_times, int level,
                               double eps0, long budget) {
  if (level < 1) throw Error(ErrorKind::InvalidArgument, "sigma-search", "level must be >= 1");
  if (!(eps0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma-search", "eps0 must be positive");
  std::vector<long> T;
  for (long n : return_times)
    if (n > 0) T.push_back(n);
  std::sort(T.begin(), T.end());
  T.erase(std::unique(T.begin(), T.end()), T.end());
  SigmaResult res;
  if (T.empty()) return res;

  long reach = std::min<long>(budget, static_cast<long>(level) * T.back());
  std::vector<Vec2> orbit{z.vec()};
  OrbitState s = OrbitState::at(z.vec());
  for (long n = 1; n <= reach; ++n) {
    dynamics::step(f, s);
    orbit.push_back(s.pos);
  }
  long evaluated = 0;
  for (int l = 1; l <= level; ++l) {
    // multisets of size l, as non-decreasing index tuples
    std::vector<std::size_t> idx(static_cast<std::size_t>(l), 0);
    for (;;) {
      long sum = 0;
      for (std::size_t i : idx) sum += T[i];
      if (sum <= reach) {
        if (++evaluated > budget) return res;
        double d = torus_distance(orbit[static_cast<std::size_t>(sum)], z.vec());
        if (d < eps0) {
          res.found = true;
          res.point = TorusPoint::from(orbit[static_cast<std::size_t>(sum)]);
          res.level_used = l;
          for (std::size_t i : idx) res.composition.push_back(T[i]);
          res.distance = d;
          return res;
        }
      }
      int k = l - 1;
      while (k >= 0 && idx[static_cast<std::size_t>(k)] + 1 == T.size()) --k;
      if (k < 0) break;
      std::size_t v = idx[static_cast<std::size_t>(k)] + 1;
      for (int j = k; j < l; ++j) idx[static_cast<std::size_t>(j)] = v;
    }
  }
  return res;
}

std::optional<PseudoPeriodicOrbit> find_labelled_return(const LiftedMap& f, TorusPoint start,
                                                        const RotationTarget& target, double eps, RegionLabel label,
                                                        long max_horizon, RegionMode mode) {
  OrbitState s = OrbitState::at(start.vec());
  std::vector<TorusPoint> pts{start};
  for (long n = 1; n <= max_horizon; ++n) {
    dynamics::step(f, s);
    if (torus_distance(s.pos, start.vec()) < eps) {
      Vec2 L = geometry::nearest_integer_vector(s.lift() - start.vec());
      Vec2 v = L / static_cast<double>(n);
      if (geometry::classify_region(target, v, geometry::kRegionTolerance, mode) == label) {
        PseudoPeriodicOrbit o;
        o.points = std::move(pts);
        o.epsilon = eps;
        o.lift_displacement = L;
        o.candidate_vector = v;
        return o;
      }
    }
    pts.push_back(s.torus());
  }
  return std::nullopt;
}

std::vector<DriftCandidate> uniform_drift_candidates(const RotationTarget& target, double gap_bound,
                                                     RegionLabel label, long max_period, std::size_t keep) {
  const Vec2 t = target.vec();
  const double tn = t.norm();
  std::vector<DriftCandidate> out;
  for (long n = 1; n <= max_period; ++n) {
    double fx = std::floor(n * t.x), fy = std::floor(n * t.y);
    for (int i = -1; i <= 2; ++i)
      for (int j = -1; j <= 2; ++j) {
        Vec2 L{fx + i, fy + j};
        Vec2 v = L / static_cast<double>(n);
        if ((v - t).norm() >= gap_bound) continue;
        if (geometry::classify_region(target, v) != label) continue;
        // distances to the two lines bounding the sectors
        auto c = geometry::region_coordinates(target, v);
        double margin = std::min(std::abs(c.perp), std::abs(c.par)) / tn;
        out.push_back({n, L, margin});
      }
  }
  std::stable_sort(out.begin(), out.end(), [](const DriftCandidate& a, const DriftCandidate& b) {
    return a.margin > b.margin;
  });
  if (out.size() > keep) out.resize(keep);
  return out;
}

std::vector<DriftCandidate> shortest_drift_candidates(const RotationTarget& target, double gap_bound,
                                                      RegionLabel label, long max_period, double min_margin,
                                                      std::size_t keep) {
  const Vec2 t = target.vec();
  const double tn = t.norm();
  std::vector<DriftCandidate> out;
  for (long n = 1; n <= max_period && out.size() < keep; ++n) {
    double fx = std::floor(n * t.x), fy = std::floor(n * t.y);
    DriftCandidate best{0, {}, -1.0};
    for (int i = -1; i <= 2; ++i)
      for (int j = -1; j <= 2; ++j) {
        Vec2 L{fx + i, fy + j};
        Vec2 v = L / static_cast<double>(n);
        if ((v - t).norm() >= gap_bound) continue;
        if (geometry::classify_region(target, v) != label) continue;
        auto c = geometry::region_coordinates(target, v);
        double margin = std::min(std::abs(c.perp), std::abs(c.par)) / tn;
        if (margin >= min_margin && margin > best.margin) best = {n, L, margin};
      }
    if (best.period > 0) out.push_back(best);
  }
  return out;
}

PseudoPeriodicOrbit drift_pseudo_orbit(const LiftedMap& f, Vec2 start, const DriftCandidate& c, double eps,
                                       double junction_gap, const std::function<bool(Vec2, Vec2)>& junction_ok) {
  if (c.period < 1) throw Error(ErrorKind::InvalidArgument, "pseudo-orbit", "period must be >= 1");
  if (!(junction_gap > 0.0 && junction_gap < eps))
    throw Error(ErrorKind::InvalidArgument, "pseudo-orbit", "junction gap must lie in (0, eps)");
  const long n = c.period;
  TorusPoint s0 = TorusPoint::from(start);
  OrbitState s = OrbitState::at(s0.vec());
  for (long i = 0; i < n; ++i) dynamics::step(f, s);
  Vec2 D = (s.offset - c.lift_displacement) + (s.pos - s0.vec());
  long J = std::clamp(static_cast<long>(std::ceil(D.norm() / junction_gap)), 1L, n);
  Vec2 corr = D / static_cast<double>(J);

  std::vector<TorusPoint> pts;
  pts.reserve(static_cast<std::size_t>(n));
  pts.push_back(s0);
  const long slack = std::max(0L, (n / J - 1) / 2);
  long k = 0;  // corrections applied so far
  for (long i = 0; i + 1 < n; ++i) {
    Vec2 w = dynamics::evaluate(f, pts.back().vec());
    // junction k is due at step round((k + 1) n / J) - 1; the last one closes the loop
    long at = static_cast<long>(std::llround(static_cast<double>(k + 1) * n / J)) - 1;
    if (k + 1 < J && i >= at - slack) {
      bool forced = i >= at + slack || i + 1 >= n - 1;
      if (forced || !junction_ok || junction_ok(w, w - corr)) {
        w -= corr;
        ++k;
      }
    }
    pts.push_back(TorusPoint::from(w));
  }
  PseudoPeriodicOrbit o = make_pseudo_orbit(f, std::move(pts), eps);
  GapCheck g = check_gaps(f, o);
  if (g.max_gap >= eps || o.lift_displacement != c.lift_displacement)
    throw Error(ErrorKind::SearchExhausted, "pseudo-orbit", "drift pseudo-orbit violates the gap bound");
  return o;
}

}  // namespace rotlab::pseudo_orbit
