#include "rotlab/closing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rotlab/error.hpp"
#include "rotlab/parallel.hpp"
#include "rotlab/point_index.hpp"

namespace rotlab::closing {

using dynamics::OrbitState;
using geometry::TorusPointIndex;

namespace {

constexpr double kCoincident = 1e-6;
constexpr std::uint32_t kForbiddenTag = std::numeric_limits<std::uint32_t>::max();

struct Obstacles {
  TorusPointIndex points;  // orbit points, tagged by global index
  TorusPointIndex images;  // f(x), tagged by the global index of x
  explicit Obstacles(double cell) : points(cell), images(cell) {}
};

// distance from the path to the nearest foreign obstacle, capped at `reach`
double clearance(const Obstacles& obs, const std::vector<Vec2>& path, std::uint32_t own_image,
                 std::uint32_t own_point, double reach) {
  Vec2 lo = path.front(), hi = path.front();
  for (Vec2 p : path) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  lo -= Vec2{reach, reach};
  hi += Vec2{reach, reach};
  Vec2 mid = 0.5 * (lo + hi);
  double best = reach;
  auto visit = [&](std::uint32_t skip) {
    return [&, skip](std::uint32_t tag, Vec2 q) {
      if (tag == skip) return;
      Vec2 base = geometry::nearest_lift(mid, q);
      for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
          best = std::min(best, geometry::point_polyline_distance(base + Vec2{double(i), double(j)}, path));
    };
  };
  obs.points.visit_box(lo, hi, visit(own_point));
  obs.images.visit_box(lo, hi, visit(own_image));
  return best;
}

struct PlannedMove {
  std::vector<Vec2> path;
  double clearance = 0.0;
  double radius = 0.0;
};

}  // namespace

std::vector<PseudoPeriodicOrbit> place_drift_orbits(const LiftedMap& f,
                                                   const std::vector<pseudo_orbit::DriftCandidate>& candidates,
                                                   double eps, const PlacementOptions& opts) {
  using Segment = std::pair<Vec2, Vec2>;
  const double sep = opts.separation_fraction * eps;
  std::vector<Segment> placed;
  // torus distance between two short segments
  auto seg_distance = [](const Segment& a, const Segment& b) {
    Vec2 shift = geometry::nearest_integer_vector(a.first - b.first);
    double best = std::numeric_limits<double>::infinity();
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j) {
        Vec2 m = shift + Vec2{double(i), double(j)};
        Vec2 q[2] = {b.first + m, b.second + m};
        Vec2 p[2] = {a.first, a.second};
        best = std::min(best, geometry::polyline_polyline_distance(p, q));
      }
    return best;
  };
  auto clear_of = [&](const Segment& s, const std::vector<Segment>& set) {
    for (const auto& q : set)
      if (seg_distance(s, q) < sep) return false;
    return true;
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<PseudoPeriodicOrbit> out;
  for (const auto& c : candidates) {
    bool done = false;
    for (int t = 0; t < opts.trials && !done; ++t) {
      Vec2 start{u01(rng), u01(rng)};
      PseudoPeriodicOrbit o;
      try {
        o = pseudo_orbit::drift_pseudo_orbit(
            f, start, c, eps, opts.junction_fraction * eps,
            [&](Vec2 a, Vec2 b) { return clear_of({a, b}, placed); });
      } catch (const Error&) {
        continue;
      }
      std::vector<Segment> mine;
      const auto& P = o.points;
      for (std::size_t i = 0; i < P.size(); ++i) {
        Vec2 w = f.forward(P[i].vec());
        Vec2 d = geometry::nearest_lift(w, P[(i + 1) % P.size()].vec());
        if ((d - w).norm() > 1e-12) mine.push_back({w, d});
      }
      bool good = true;
      for (std::size_t i = 0; i < mine.size() && good; ++i) {
        good = clear_of(mine[i], placed);
        for (std::size_t j = i + 1; j < mine.size() && good; ++j) good = seg_distance(mine[i], mine[j]) >= sep;
      }
      if (!good) continue;
      placed.insert(placed.end(), mine.begin(), mine.end());
      out.push_back(std::move(o));
      done = true;
    }
    if (!done) throw Error(ErrorKind::SearchExhausted, "placement", "no start keeps the junction paths separated");
  }
  return out;
}

ClosingPlan plan_closing(const LiftedMap& f, std::vector<PseudoPeriodicOrbit> orbits, double eps,
                         const ClosingOptions& opts) {
  if (!(eps > 0.0 && eps <= 0.5)) throw Error(ErrorKind::InvalidArgument, "closing", "eps must lie in (0, 1/2]");
  ClosingPlan plan;
  plan.epsilon = eps;

  std::size_t total = 0;
  for (std::size_t k = 0; k < orbits.size(); ++k) {
    if (orbits[k].points.empty()) throw Error(ErrorKind::InvalidArgument, "closing", "empty orbit");
    auto g = pseudo_orbit::check_gaps(f, orbits[k]);
    if (!(g.max_gap < eps))
      throw Error(ErrorKind::Closing, "closing", "orbit " + std::to_string(k) + " has a gap >= eps");
    total += orbits[k].points.size();
  }
  if (total >= kForbiddenTag) throw Error(ErrorKind::InvalidArgument, "closing", "too many orbit points");

  const double cell = std::clamp(1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(total, 1))),
                                 1.0 / 4096, eps / 4);
  Obstacles obs(cell);
  {
    TorusPointIndex seen(1.0 / 1024);
    std::uint32_t id = 0;
    for (const auto& o : orbits)
      for (auto p : o.points) {
        if (seen.any_within(p.vec(), kCoincident))
          throw Error(ErrorKind::Closing, "closing", "orbit points coincide (distance below 1e-6)");
        seen.insert(p.vec(), id);
        obs.points.insert(p.vec(), id);
        ++id;
      }
  }
  std::vector<Vec2> forbidden = opts.forbidden;
  if (opts.avoid_fixed_points)
    for (Vec2 p : f.known_fixed_points()) forbidden.push_back(p);
  for (Vec2 p : forbidden) obs.points.insert(p, kForbiddenTag);

  // junctions and their images
  std::vector<std::uint32_t> own_image, own_point;
  {
    std::uint32_t base = 0;
    for (std::size_t k = 0; k < orbits.size(); ++k) {
      const auto& pts = orbits[k].points;
      const std::size_t n = pts.size();
      for (std::size_t i = 0; i < n; ++i) {
        Vec2 w = dynamics::evaluate(f, pts[i].vec());
        obs.images.insert(w, base + static_cast<std::uint32_t>(i));
        Vec2 d = geometry::nearest_lift(w, pts[(i + 1) % n].vec());
        if ((d - w).norm() <= opts.zero_gap) continue;
        plan.junctions.push_back({k, i, w, d});
        own_image.push_back(base + static_cast<std::uint32_t>(i));
        own_point.push_back(base + static_cast<std::uint32_t>((i + 1) % n));
      }
      base += static_cast<std::uint32_t>(n);
    }
  }

  const double rmax = std::min(eps * opts.radius_fraction, opts.max_radius);
  const double reach = rmax / opts.clearance_factor;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  auto make = [&](std::size_t j, std::vector<Vec2> path) {
    PlannedMove m;
    m.path = std::move(path);
    m.clearance = clearance(obs, m.path, own_image[j], own_point[j], reach);
    m.radius = std::min(rmax, opts.clearance_factor * m.clearance);
    return m;
  };
  auto submoves_ok = [&](const PlannedMove& m) {
    return m.radius > 0.0 &&
           geometry::polyline_length(m.path) / (dynamics::kSubmoveFraction * m.radius) <= opts.max_submoves;
  };
  auto jittered = [&](std::size_t j) {
    const auto& J = plan.junctions[j];
    Vec2 off;
    do {
      off = {u(rng), u(rng)};
    } while (off.norm2() > 1.0);
    Vec2 mid = 0.5 * (J.source + J.destination) + (opts.jitter_fraction * eps) * off;
    return std::vector<Vec2>{J.source, mid, J.destination};
  };

  std::vector<PlannedMove> pm;
  pm.reserve(plan.junctions.size());
  for (std::size_t j = 0; j < plan.junctions.size(); ++j) {
    PlannedMove m = make(j, {plan.junctions[j].source, plan.junctions[j].destination});
    for (int r = 0; r < opts.retries && !submoves_ok(m); ++r) m = make(j, jittered(j));
    if (!submoves_ok(m))
      throw Error(ErrorKind::Closing, "closing",
                  "no path with enough clearance for junction " + std::to_string(j) + " after retries");
    pm.push_back(std::move(m));
  }

  auto build = [&] {
    std::vector<BumpMove> mv;
    mv.reserve(pm.size());
    for (const auto& m : pm) mv.emplace_back(m.path, m.radius);
    return mv;
  };
  std::vector<BumpMove> moves = build();
  for (int round = 0;; ++round) {
    auto bad = dynamics::overlapping_supports(moves);
    if (bad.empty()) break;
    if (round >= opts.retries)
      throw Error(ErrorKind::Closing, "closing", "supports still overlap after retries");
    for (auto [a, b] : bad) {
      double dist = dynamics::torus_path_distance(moves[a], moves[b]);
      PlannedMove sa = pm[a], sb = pm[b];
      sa.radius = std::min(sa.radius, opts.clearance_factor * dist);
      sb.radius = std::min(sb.radius, opts.clearance_factor * dist);
      if (submoves_ok(sa) && submoves_ok(sb)) {
        pm[a] = sa;
        pm[b] = sb;
      } else {
        pm[b] = make(b, jittered(b));
        if (!submoves_ok(pm[b])) pm[b] = make(b, {plan.junctions[b].source, plan.junctions[b].destination});
      }
    }
    moves = build();
  }

  plan.min_clearance = std::numeric_limits<double>::infinity();
  for (const auto& m : pm) plan.min_clearance = std::min(plan.min_clearance, m.clearance);
  if (pm.empty()) plan.min_clearance = 0.0;
  for (const auto& m : moves) plan.total_c0 = std::max(plan.total_c0, m.length());
  plan.moves = std::move(moves);
  plan.orbits = std::move(orbits);
  return plan;
}

ClosedSystem make_closed_system(MapPtr f, CompositePerturbation pert, std::vector<PeriodicOrbitRecord> orbits,
                                double eps) {
  ClosedSystem s;
  s.original = f;
  s.map = dynamics::compose_with_perturbation(f, pert);
  s.perturbation = std::move(pert);
  s.periodic_orbits = std::move(orbits);
  s.epsilon = eps;
  return s;
}

ClosedSystem execute_closing(MapPtr f, const ClosingPlan& plan) {
  CompositePerturbation pert(plan.moves);
  std::vector<PeriodicOrbitRecord> recs;
  for (const auto& o : plan.orbits) {
    PeriodicOrbitRecord r;
    r.points = o.points;
    r.period = static_cast<long>(o.period());
    r.lift_displacement = o.lift_displacement;
    r.rational_vector = o.lift_displacement / static_cast<double>(r.period);
    recs.push_back(std::move(r));
  }
  return make_closed_system(std::move(f), std::move(pert), std::move(recs), plan.epsilon);
}

VerifyReport verify_closed_system(const ClosedSystem& sys, const LiftedMap& original, const VerifyOptions& opts) {
  VerifyReport rep;
  const LiftedMap& g = *sys.map;
  const CompositePerturbation& P = sys.perturbation;
  rep.declared_c0 = P.c0_distance();

  // sup |g - f| = sup over images w of |phi(w) - w|; support grids
  const auto& moves = P.moves();
  std::vector<double> sup(moves.size(), 0.0);
  std::vector<long> cnt(moves.size(), 0);
  parallel_for(moves.size(), opts.threads, [&](std::size_t k) {
    const auto& m = moves[k];
    const double r = m.radius(), h = r * opts.grid_fraction;
    const auto& path = m.path();
    for (std::size_t s = 1; s < path.size(); ++s) {
      Vec2 p = path[s - 1], q = path[s];
      double len = (q - p).norm();
      Vec2 e = (q - p) / len, nv{-e.y, e.x};
      const double ha = std::max(h, (len + 2 * r) / opts.max_tube_steps);
      for (double a = -r; a <= len + r; a += ha)
        for (double b = -r; b <= r; b += h) {
          Vec2 w = p + a * e + b * nv;
          sup[k] = std::max(sup[k], (P.apply(w) - w).norm());
          ++cnt[k];
        }
    }
  });
  for (std::size_t k = 0; k < moves.size(); ++k) {
    rep.c0_distance = std::max(rep.c0_distance, sup[k]);
    rep.support_samples += cnt[k];
  }

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < opts.samples; ++i) {
    Vec2 z{u01(rng), u01(rng)};
    Vec2 fz = original.forward(z), gz = g.forward(z);
    double d = (gz - fz).norm();
    rep.c0_distance = std::max(rep.c0_distance, d);
    if (P.support_of(fz) < 0) rep.locality_error = std::max(rep.locality_error, d);
    rep.inverse_error = std::max(rep.inverse_error, (g.inverse(gz) - z).norm());
  }
  // inverse consistency where the moves act
  if (!moves.empty()) {
    int focused = std::min(opts.samples, 4000);
    for (int i = 0; i < focused; ++i) {
      const auto& m = moves[static_cast<std::size_t>(u01(rng) * moves.size()) % moves.size()];
      const auto& path = m.path();
      std::size_t s = 1 + static_cast<std::size_t>(u01(rng) * (path.size() - 1)) % (path.size() - 1);
      Vec2 w = path[s - 1] + u01(rng) * (path[s] - path[s - 1]);
      double rho = m.radius() * std::sqrt(u01(rng)), th = 2.0 * 3.14159265358979323846 * u01(rng);
      w += Vec2{rho * std::cos(th), rho * std::sin(th)};
      Vec2 z = original.inverse(w);
      rep.inverse_error = std::max(rep.inverse_error, (g.inverse(g.forward(z)) - z).norm());
    }
  }

  for (const auto& o : sys.periodic_orbits) {
    Vec2 x0 = o.points.front().vec();
    OrbitState s = OrbitState::at(x0);
    for (long n = 0; n < o.period; ++n) dynamics::step(g, s);
    Vec2 err = (s.offset - o.lift_displacement) + (s.pos - x0);
    rep.closure_errors.push_back(err.norm());
    rep.max_closure_error = std::max(rep.max_closure_error, err.norm());
  }
  for (Vec2 p : original.known_fixed_points())
    rep.fixed_point_error = std::max(rep.fixed_point_error, (g.forward(p) - original.forward(p)).norm());
  return rep;
}

}  // namespace rotlab::closing
