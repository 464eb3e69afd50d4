#include "rotlab/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "rotlab/error.hpp"
#include "rotlab/numeric.hpp"
#include "rotlab/parallel.hpp"

namespace rotlab::rotation {

using dynamics::OrbitState;

namespace {

// Averages of the same displacement over different n differ in the last
// bits; vertices closer than this are one vertex.
constexpr double kVertexMerge = 1e-13;

geometry::ConvexPolygon merged_hull(const std::vector<Vec2>& pts) {
  auto h = geometry::convex_hull(pts);
  std::vector<Vec2> kept;
  for (Vec2 v : h.vertices())
    if (kept.empty() || (v - kept.back()).norm() > kVertexMerge) kept.push_back(v);
  while (kept.size() > 1 && (kept.back() - kept.front()).norm() <= kVertexMerge) kept.pop_back();
  if (kept.size() == h.size()) return h;
  return geometry::convex_hull(kept);
}

// Samples the orbit of `start` at the requested (sorted) horizons.
std::vector<Vec2> sample_means(const LiftedMap& f, Vec2 start, const std::vector<long>& horizons) {
  std::vector<Vec2> out;
  out.reserve(horizons.size());
  if (horizons.empty()) return out;
  OrbitState s = OrbitState::at(start);
  VecAccumulator d;
  std::size_t k = 0;
  for (long n = 1; n <= horizons.back(); ++n) {
    d.add(dynamics::step(f, s));
    while (k < horizons.size() && horizons[k] == n) {
      out.push_back(d.value() / static_cast<double>(n));
      ++k;
    }
  }
  return out;
}

}  // namespace

std::vector<long> standard_horizons(long horizon) {
  if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "rotation", "horizon must be >= 1");
  std::set<long> h{std::max(1L, horizon / 4), std::max(1L, horizon / 2), horizon};
  return {h.begin(), h.end()};
}

std::vector<Vec2> grid_starts(int grid) {
  if (grid < 1) throw Error(ErrorKind::InvalidArgument, "rotation", "grid density must be >= 1");
  const geometry::RotationTarget t = geometry::RotationTarget::golden_silver();
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) out.push_back({(i + t.alpha / 7) / grid, (j + t.beta / 7) / grid});
  return out;
}

std::vector<RotationHull> estimate_rotation_hulls(const LiftedMap& f, int grid_density,
                                                  const std::vector<long>& horizons, const HullOptions& opts) {
  if (horizons.empty()) throw Error(ErrorKind::InvalidArgument, "rotation", "no horizons requested");
  std::set<long> all;
  std::vector<std::vector<long>> per;
  for (long H : horizons) {
    per.push_back(standard_horizons(H));
    all.insert(per.back().begin(), per.back().end());
  }
  std::vector<long> common(all.begin(), all.end());

  struct Start {
    Vec2 point;
    std::vector<long> horizons;  // sorted; empty means `common`
  };
  std::vector<Start> starts;
  for (Vec2 p : grid_starts(grid_density)) starts.push_back({p, {}});
  if (opts.include_fixed_points)
    for (Vec2 p : f.known_fixed_points()) starts.push_back({p, {}});
  for (const ExtraStart& e : opts.extra_starts) {
    std::set<long> h(e.horizons.begin(), e.horizons.end());
    for (long n : h)
      if (n < 1) throw Error(ErrorKind::InvalidArgument, "rotation", "extra-start horizon must be >= 1");
    starts.push_back({e.point, std::vector<long>(h.begin(), h.end())});
  }

  std::vector<std::vector<Vec2>> means(starts.size());
  parallel_for(starts.size(), opts.threads, [&](std::size_t i) {
    const Start& s = starts[i];
    means[i] = sample_means(f, s.point, s.horizons.empty() ? common : s.horizons);
  });

  std::vector<RotationHull> out;
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    std::vector<Vec2> pts;
    std::vector<DisplacementSample> samples;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const Start& s = starts[i];
      const std::vector<long>& hs = s.horizons.empty() ? common : s.horizons;
      for (std::size_t j = 0; j < hs.size(); ++j) {
        bool wanted = !s.horizons.empty() ||
                      std::find(per[k].begin(), per[k].end(), hs[j]) != per[k].end();
        if (!wanted) continue;
        pts.push_back(means[i][j]);
        if (opts.keep_samples) samples.push_back({s.point, hs[j], means[i][j]});
      }
    }
    RotationHull h;
    h.hull = merged_hull(pts);
    h.horizon = horizons[k];
    h.grid_density = grid_density;
    h.samples = std::move(samples);
    out.push_back(std::move(h));
  }
  return out;
}

RotationHull estimate_rotation_hull(const LiftedMap& f, int grid_density, long horizon, const HullOptions& opts) {
  return estimate_rotation_hulls(f, grid_density, {horizon}, opts).front();
}

Vec2 orbit_rotation_vector(const LiftedMap& f, Vec2 start, long horizon) {
  if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "rotation", "horizon must be >= 1");
  return sample_means(f, start, {horizon}).front();
}

std::vector<TraceRow> trace_orbit(const LiftedMap& f, Vec2 start, long horizon, long every) {
  std::vector<TraceRow> rows;
  OrbitState s = OrbitState::at(start);
  VecAccumulator d;
  rows.push_back({0, s.lift(), {0.0, 0.0}});
  for (long n = 1; n <= horizon; ++n) {
    d.add(dynamics::step(f, s));
    if (n % std::max(1L, every) == 0 || n == horizon) rows.push_back({n, s.lift(), d.value()});
  }
  return rows;
}

std::optional<double> growth_slope(const std::vector<DeviationCheckpoint>& cps, int min_doublings) {
  std::vector<DeviationCheckpoint> pow2;
  for (const auto& c : cps)
    if (c.n > 0 && (c.n & (c.n - 1)) == 0) pow2.push_back(c);
  std::size_t need = static_cast<std::size_t>(std::max(1, min_doublings)) + 1;
  if (pow2.size() < need) return std::nullopt;
  double mx = 0, my = 0;
  for (const auto& c : pow2) {
    mx += std::log2(static_cast<double>(c.n));
    my += c.sup;
  }
  mx /= pow2.size();
  my /= pow2.size();
  double sxy = 0, sxx = 0;
  for (const auto& c : pow2) {
    double dx = std::log2(static_cast<double>(c.n)) - mx;
    sxy += dx * (c.sup - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<DeviationReport> measure_deviations(const LiftedMap& f, const ConvexPolygon& hull,
                                                const std::vector<Vec2>& directions, int grid_density,
                                                long max_horizon, const DeviationOptions& opts) {
  if (max_horizon < 1) throw Error(ErrorKind::InvalidArgument, "rotation", "max horizon must be >= 1");
  if (hull.empty()) throw Error(ErrorKind::InvalidArgument, "rotation", "deviation needs a nonempty hull");
  const std::size_t D = directions.size();
  std::vector<double> support(D);
  for (std::size_t d = 0; d < D; ++d) {
    if (directions[d].x == 0.0 && directions[d].y == 0.0)
      throw Error(ErrorKind::InvalidArgument, "rotation", "deviation direction is zero");
    support[d] = hull.support(directions[d]);
  }

  std::vector<long> checkpoints;
  for (long n = 1; n <= max_horizon; n *= 2) checkpoints.push_back(n);
  if (checkpoints.back() != max_horizon) checkpoints.push_back(max_horizon);

  const std::vector<Vec2> starts = grid_starts(grid_density);
  struct PerStart {
    std::vector<double> sup;       // D x checkpoints (running sup)
    std::vector<double> best;      // D
    std::vector<long> best_n;      // D
  };
  std::vector<PerStart> res(starts.size());
  const double lowest = -std::numeric_limits<double>::infinity();
  parallel_for(starts.size(), opts.threads, [&](std::size_t i) {
    PerStart& r = res[i];
    r.sup.assign(D * checkpoints.size(), lowest);
    r.best.assign(D, lowest);
    r.best_n.assign(D, 0);
    std::vector<Accumulator> proj(D);
    OrbitState s = OrbitState::at(starts[i]);
    std::size_t c = 0;
    for (long n = 1; n <= max_horizon; ++n) {
      Vec2 disp = dynamics::step(f, s);
      for (std::size_t d = 0; d < D; ++d) {
        proj[d].add(geometry::dot(disp, directions[d]));
        double v = proj[d].value() - static_cast<double>(n) * support[d];
        if (v > r.best[d]) {
          r.best[d] = v;
          r.best_n[d] = n;
        }
      }
      if (checkpoints[c] == n) {
        for (std::size_t d = 0; d < D; ++d) r.sup[d * checkpoints.size() + c] = r.best[d];
        ++c;
      }
    }
  });

  std::vector<DeviationReport> out;
  for (std::size_t d = 0; d < D; ++d) {
    DeviationReport rep;
    rep.direction = directions[d];
    rep.hull_support = support[d];
    rep.sup_deviation = lowest;
    for (std::size_t i = 0; i < starts.size(); ++i)
      if (res[i].best[d] > rep.sup_deviation) {
        rep.sup_deviation = res[i].best[d];
        rep.argmax_start = starts[i];
        rep.argmax_horizon = res[i].best_n[d];
      }
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      double m = lowest;
      for (std::size_t i = 0; i < starts.size(); ++i) m = std::max(m, res[i].sup[d * checkpoints.size() + c]);
      rep.checkpoints.push_back({checkpoints[c], m});
    }
    auto slope = growth_slope(rep.checkpoints, opts.min_doublings);
    rep.rate = slope.value_or(0.0);
    rep.bounded_up_to = max_horizon;
    rep.verdict = slope && *slope >= opts.growth_threshold ? Verdict::GrowthDetected : Verdict::BoundedUpTo;
    out.push_back(std::move(rep));
  }
  return out;
}

DeviationReport measure_deviation(const LiftedMap& f, const ConvexPolygon& hull, Vec2 direction, int grid_density,
                                  long max_horizon, const DeviationOptions& opts) {
  return measure_deviations(f, hull, {direction}, grid_density, max_horizon, opts).front();
}

}  // namespace rotlab::rotation
