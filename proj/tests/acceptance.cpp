// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rotlab/certify.hpp"
#include "rotlab/chain.hpp"
#include "rotlab/closing.hpp"
#include "rotlab/error.hpp"
#include "rotlab/experiments.hpp"
#include "rotlab/rotation.hpp"

using namespace rotlab;
using geometry::RotationTarget;
using geometry::TorusPoint;
using geometry::Vec2;

namespace {

const RotationTarget kT = RotationTarget::golden_silver();

int threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Runner {
  int failures = 0;

  void run(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = s < limit_s;
    bool ok = o.pass && in_time;
    failures += ok ? 0 : 1;
    std::printf("criterion %d %-32s %s  %s; %.2f s (limit %.0f s)%s\n", id, name.c_str(), ok ? "PASS" : "FAIL",
                o.detail.c_str(), s, limit_s, in_time ? "" : " TOO SLOW");
    std::fflush(stdout);
  }
};

// 1 -------------------------------------------------------------------------
Outcome rigid_hull() {
  dynamics::RigidRotation R(kT);
  double worst = 0.0;
  std::size_t max_vertices = 0;
  for (int grid : {1, 4, 16})
    for (long h : {1L, 97L, 1000L, 10'000L}) {
      auto hull = rotation::estimate_rotation_hull(R, grid, h);
      max_vertices = std::max(max_vertices, hull.hull.size());
      for (Vec2 v : hull.hull.vertices()) worst = std::max(worst, (v - kT.vec()).norm());
    }
  return {max_vertices == 1 && worst < 1e-12,
          "vertices " + std::to_string(max_vertices) + ", max |v-(a,b)| " + fmt("%.2e", worst) + " (tol 1e-12)"};
}

// 2 -------------------------------------------------------------------------
Outcome close_rigid() {
  auto R = std::make_shared<dynamics::RigidRotation>(kT);
  experiments::CloseRigidParams p;
  p.verify.threads = threads();
  auto r = experiments::close_rigid(R, kT, p);
  const geometry::RegionLabel want[4] = {geometry::RegionLabel::Delta1, geometry::RegionLabel::Delta0,
                                         geometry::RegionLabel::Omega1, geometry::RegionLabel::Omega0};
  bool labels = r.candidates.size() == 4;
  for (std::size_t i = 0; labels && i < 4; ++i) {
    const auto& o = r.system.periodic_orbits[i];
    labels = geometry::classify_region(kT, o.rational_vector) == want[i];
  }
  bool ok = labels && r.passed && r.report.c0_distance < 0.05 && r.report.max_closure_error < 1e-9 &&
            r.hull_margin > 1e-3;
  std::ostringstream d;
  d << "labels " << (labels ? "D1,D0,O1,O0" : "WRONG") << ", C0 " << fmt("%.4f", r.report.c0_distance)
    << " (< 0.05), closure " << fmt("%.1e", r.report.max_closure_error) << " (< 1e-9), margin "
    << fmt("%.4f", r.hull_margin) << " (> 1e-3)";
  return {ok, d.str()};
}

// 3 -------------------------------------------------------------------------
Outcome closing_contract() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double closure = 0, locality = 0, inverse = 0;
  int done = 0;
  for (int trial = 0; trial < 50; ++trial) {
    dynamics::MapPtr f;
    switch (trial % 3) {
      case 0:
        f = std::make_shared<dynamics::DoubleShear>(0.1 * u(rng), u(rng), 0.1 * u(rng), u(rng));
        break;
      case 1:
        f = std::make_shared<dynamics::Translation>(Vec2{u(rng), u(rng)});
        break;
      default:
        f = std::make_shared<dynamics::ModulatedTranslation>(RotationTarget(0.1 + 0.8 * u(rng), 0.1 + 0.8 * u(rng)),
                                                             0.1 * u(rng));
    }
    double eps = 0.03 + 0.05 * u(rng);
    auto o = pseudo_orbit::detect_pseudo_periodic(*f, TorusPoint::from({u(rng), u(rng)}), eps, 200'000);
    closing::ClosingOptions co;
    co.seed = static_cast<std::uint64_t>(trial) + 1;
    auto sys = closing::execute_closing(f, closing::plan_closing(*f, {o}, eps, co));
    closing::VerifyOptions vo;
    vo.samples = 2000;
    vo.threads = threads();
    auto rep = closing::verify_closed_system(sys, *f, vo);
    closure = std::max(closure, rep.max_closure_error);
    locality = std::max(locality, rep.locality_error);
    inverse = std::max(inverse, rep.inverse_error);
    ++done;
  }
  bool ok = done == 50 && closure < 1e-9 && locality < 1e-12 && inverse < 1e-6;
  std::ostringstream d;
  d << done << " systems, closure " << fmt("%.1e", closure) << " (< 1e-9), locality " << fmt("%.1e", locality)
    << " (< 1e-12), inverse " << fmt("%.1e", inverse) << " (< 1e-6)";
  return {ok, d.str()};
}

// 4 and 5 share the slowed-flow hulls ----------------------------------------
struct SlowedFlowRun {
  dynamics::SlowedFlowMap map{dynamics::SlowedFlowParams{}};
  std::vector<rotation::RotationHull> hulls;  // 2^10, 2^12, 2^14
  double hull_seconds = 0.0;

  void compute() {
    auto t0 = std::chrono::steady_clock::now();
    rotation::HullOptions o;
    o.threads = threads();
    hulls = rotation::estimate_rotation_hulls(map, 32, {1L << 10, 1L << 12, 1L << 14}, o);
    hull_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

Outcome perpendicular_deviation(SlowedFlowRun& S) {
  if (S.hulls.empty()) S.compute();
  rotation::DeviationOptions o;
  o.threads = threads();
  auto reps = rotation::measure_deviations(S.map, S.hulls.back().hull, {kT.perp(), -1.0 * kT.perp()}, 32, 1L << 14, o);
  bool ok = true;
  std::ostringstream d;
  for (std::size_t k = 0; k < reps.size(); ++k) {
    const auto& r = reps[k];
    // checkpoints at 2^11 .. 2^14
    std::vector<double> s;
    for (const auto& c : r.checkpoints)
      if (c.n >= (1L << 11) && (c.n & (c.n - 1)) == 0) s.push_back(c.sup);
    double rel = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i)
      rel = std::max(rel, std::abs(s[i] - s[i - 1]) / std::max(std::abs(s[i - 1]), 1e-9));
    bool bounded = r.verdict == rotation::Verdict::BoundedUpTo;
    ok = ok && bounded && s.size() == 4 && rel < 0.1;
    d << (k ? "; " : "") << (k ? "-w" : "+w") << ": " << (bounded ? "bounded" : "GROWTH") << ", sup "
      << fmt("%.2e", r.sup_deviation) << ", rel change " << fmt("%.1e", rel) << " (< 0.1)";
  }
  d << "; hull " << fmt("%.0f", S.hull_seconds) << " s shared with 5";
  return {ok, d.str()};
}

Outcome segment_hull(SlowedFlowRun& S) {
  if (S.hulls.empty()) S.compute();
  auto seg = geometry::convex_hull({Vec2{0, 0}, kT.vec()});
  std::vector<double> h;
  for (const auto& r : S.hulls) h.push_back(geometry::hausdorff_distance(r.hull, seg));
  bool monotone = h[1] <= h[0] && h[2] <= h[1];
  const auto& V = S.hulls.back().hull.vertices();
  double to_origin = 1e9, to_t = 1e9;
  for (Vec2 v : V) {
    to_origin = std::min(to_origin, v.norm());
    to_t = std::min(to_t, (v - kT.vec()).norm());
  }
  bool ok = monotone && h[2] < 0.05 && to_origin == 0.0 && to_t < 0.05;
  std::ostringstream d;
  d << "Hausdorff " << fmt("%.4f", h[0]) << " / " << fmt("%.4f", h[1]) << " / " << fmt("%.4f", h[2])
    << (monotone ? " non-increasing" : " NOT monotone") << " (< 0.05), endpoints |v| " << fmt("%.1e", to_origin)
    << " (exact 0), |v-(a,b)| " << fmt("%.4f", to_t) << " (< 0.05)";
  return {ok, d.str()};
}

// 6 -------------------------------------------------------------------------
Outcome chain_ledger() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<long> len(1, 2000);
  std::uniform_int_distribution<int> nseg(1, 8);
  double perp = 0, par = 0;
  for (int trial = 0; trial < 100; ++trial) {
    dynamics::DoubleShear f(0.2 * u(rng), u(rng), 0.2 * u(rng), u(rng));
    RotationTarget t(0.1 + 0.8 * u(rng), 0.1 + 0.8 * u(rng));
    std::vector<chain::SegmentRequest> req;
    int S = nseg(rng);
    for (int k = 0; k < S; ++k) req.push_back({TorusPoint::from({u(rng), u(rng)}), len(rng), u(rng) < 0.3});
    auto mode = trial % 2 ? geometry::RegionMode::Origin : geometry::RegionMode::Segment;
    auto c = chain::assemble_chain(f, t, req, 0.1, mode);
    perp = std::max(perp, std::abs(c.ledger_perp() - c.total_perp()));
    par = std::max(par, std::abs(c.ledger_par() - c.total_par()));
  }
  return {perp < 1e-9 && par < 1e-9,
          "100 chains, max ledger error perp " + fmt("%.1e", perp) + ", par " + fmt("%.1e", par) + " (< 1e-9)"};
}

// 7 -------------------------------------------------------------------------
Outcome certification() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  const Vec2 dirs[] = {{0, 1}, {1, 0}, {1, 1}, {-2, 3}, {1, -2}, {3, 1}};
  double err = 0.0;
  int certified = 0, recertified = 0, flagged = 0, cases = 0;
  while (cases < 30) {
    Vec2 d{u(rng), u(rng)};
    Vec2 dir = dirs[cases % 6];
    Vec2 n = Vec2{-dir.y, dir.x} / dir.norm();
    double predicted = std::abs(geometry::dot(d, n));
    if (predicted < 0.02) continue;
    ++cases;
    auto f = std::make_shared<dynamics::Translation>(d);
    auto curve = certify::straight_curve(dir, {0.0, 0.0}, 3);
    auto c = certify::certify_brouwer_line(*f, curve);
    if (!c.verdict) continue;
    ++certified;
    err = std::max({err, std::abs(c.min_forward_clearance - predicted), std::abs(c.min_backward_clearance - predicted)});

    // bump of half the clearance pushing toward the curve
    Vec2 p{0.5, 0.5};
    dynamics::BumpMove m({p, p - (0.5 * c.clearance()) * c.forward_normal()}, 0.1);
    auto g = dynamics::compose_with_perturbation(f, dynamics::CompositePerturbation({m}));
    auto c2 = certify::certify_brouwer_line(*g, curve);
    if (c2.verdict && c2.forward_side == c.forward_side) ++recertified;

    // d reflected to the other side of the line
    Vec2 bad = d - (2.0 * geometry::dot(d, n)) * n;
    auto rep = certify::cone_confinement_check({c}, geometry::convex_hull({d, bad}));
    if (rep.violations.size() == 1 && rep.violations[0].vertex == bad && rep.epsilon0 == c.clearance()) ++flagged;
  }
  bool ok = certified == cases && recertified == cases && flagged == cases && err < 1e-9;
  std::ostringstream s;
  s << cases << " translations: certified " << certified << ", clearance error " << fmt("%.1e", err)
    << " (< 1e-9), recertified after eps0/2 bump " << recertified << ", synthetic vertex flagged " << flagged;
  return {ok, s.str()};
}

// 8 -------------------------------------------------------------------------
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  auto cfg = config::ConfigFile::parse(
      "[experiment]\nkind = close-rigid\nseed = 7\n[map]\nfamily = rigid_rotation\n[close]\neps = 0.05\n",
      "acceptance");
  namespace fs = std::filesystem;
  fs::path root = fs::temp_directory_path() / "rotlab_acceptance";
  fs::remove_all(root);
  std::vector<std::string> names;
  for (int run = 0; run < 2; ++run) {
    experiments::RunContext ctx;
    ctx.threads = run == 0 ? 1 : threads() + 1;
    auto out = experiments::run_experiment("close", cfg, ctx);
    experiments::write_outputs(out, (root / std::to_string(run)).string(), experiments::Format::Json);
  }
  int files = 0;
  bool same = true;
  for (const auto& e : fs::directory_iterator(root / "0")) {
    if (e.path().extension() != ".json") continue;
    ++files;
    same = same && slurp(e.path()) == slurp(root / "1" / e.path().filename());
  }
  fs::remove_all(root);
  return {same && files >= 2, std::to_string(files) + " JSON files " + (same ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
  Runner r;
  SlowedFlowRun slowed;
  r.run(1, "rigid-rotation hull exactness", 1, rigid_hull);
  r.run(2, "close-rigid reproduction", 60, close_rigid);
  r.run(3, "closing contract", 30, closing_contract);
  r.run(4, "perpendicular bounded deviation", 300, [&] { return perpendicular_deviation(slowed); });
  r.run(5, "slowed-flow segment hull", 300, [&] { return segment_hull(slowed); });
  r.run(6, "chain bookkeeping identity", 5, chain_ledger);
  r.run(7, "Brouwer certification and cone", 5, certification);
  r.run(8, "determinism", 120, determinism);
  std::printf("%d of 8 criteria failed\n", r.failures);
  return r.failures == 0 ? 0 : 1;
}
