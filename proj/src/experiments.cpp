#include "rotlab/experiments.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rotlab/certify.hpp"
#include "rotlab/chain.hpp"
#include "rotlab/error.hpp"
#include "rotlab/rotation.hpp"

namespace rotlab::experiments {

using dynamics::format_real;
using dynamics::MapPtr;
using geometry::RegionLabel;
using geometry::RotationTarget;
using geometry::Vec2;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) { return format_real(v); }

[[noreturn]] void config_fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorKind::Config, "config", field + ": " + msg);
}

// [section] keys accepted per experiment
const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"experiment", {"kind", "seed"}},
      {"target", {"alpha", "beta"}},
      {"output", {"dir"}},
      {"hull", {"grid", "horizon", "horizons", "trace_start", "trace_every"}},
      {"deviation", {"grid", "max_horizon", "hull_grid", "hull_horizon", "directions", "growth_threshold",
                     "min_doublings"}},
      {"pseudo", {"search", "start", "eps", "max_horizon", "K", "budget", "direction", "dense", "max_period",
                  "min_margin", "junction_fraction"}},
      {"close", {"eps", "drift_fraction", "min_margin", "max_period", "junction_fraction", "separation_fraction",
                 "trials", "samples", "hull_margin", "hull_grid", "hull_horizon"}},
      {"grow", {"mode", "eps", "strategy", "close", "samples", "rk_K", "rk_budget", "recurrence_horizon",
                "max_ladder_steps", "case_one_horizon", "large_budget"}},
      {"certify", {"directions", "through", "amplitude", "curve_file", "resolution", "hull_grid", "hull_horizon",
                   "extra_vertices", "perturb"}},
      {"replay", {"system", "samples"}},
  };
  return k;
}

void check_sections(const config::ConfigFile& cfg) {
  static const std::set<std::string> all = [] {
    std::set<std::string> s{"map"};
    for (const auto& [name, keys] : known_keys()) s.insert(name);
    return s;
  }();
  for (const auto& [name, keys] : known_keys()) cfg.require_known(name, keys);
  std::istringstream in(cfg.canonical());
  std::string line;
  while (std::getline(in, line))
    if (line.size() > 2 && line.front() == '[') {
      std::string name = line.substr(1, line.size() - 2);
      if (!all.count(name)) config_fail(name, "unknown section");
    }
}

MapPtr map_from(const config::ConfigFile& cfg) {
  if (!cfg.has_section("map")) config_fail("map", "missing [map] section");
  return dynamics::make_map(config::map_spec_from(cfg));
}

RotationTarget target_from(const config::ConfigFile& cfg) {
  RotationTarget d = RotationTarget::golden_silver();
  double a = d.alpha, b = d.beta;
  bool given = false;
  for (const char* sec : {"map", "target"})
    if (cfg.has(sec, "alpha") || cfg.has(sec, "beta")) {
      a = cfg.get_real(sec, "alpha", a);
      b = cfg.get_real(sec, "beta", b);
      given = true;
    }
  if (!given || (a == d.alpha && b == d.beta)) return d;
  try {
    return RotationTarget(a, b);
  } catch (const Error& e) {
    config_fail("target", e.what());
  }
}

long positive_int(const config::ConfigFile& cfg, const std::string& sec, const std::string& key, long fallback) {
  long long v = cfg.get_int(sec, key, fallback);
  if (v <= 0) config_fail(sec + "." + key, "must be positive");
  return static_cast<long>(v);
}

double positive_real(const config::ConfigFile& cfg, const std::string& sec, const std::string& key,
                     double fallback) {
  double v = cfg.get_real(sec, key, fallback);
  if (!(v > 0.0)) config_fail(sec + "." + key, "must be positive");
  return v;
}

Vec2 vec_field(const config::ConfigFile& cfg, const std::string& sec, const std::string& key, Vec2 fallback) {
  if (!cfg.has(sec, key)) return fallback;
  auto v = cfg.get_reals(sec, key);
  if (v.size() != 2) config_fail(sec + "." + key, "expected two numbers");
  return {v[0], v[1]};
}

std::vector<Vec2> vec_list(const config::ConfigFile& cfg, const std::string& sec, const std::string& key) {
  std::vector<Vec2> out;
  if (!cfg.has(sec, key)) return out;
  auto v = cfg.get_reals(sec, key);
  if (v.size() % 2 != 0) config_fail(sec + "." + key, "expected pairs of numbers");
  for (std::size_t i = 0; i < v.size(); i += 2) out.push_back({v[i], v[i + 1]});
  return out;
}

CsvTable points_table(const std::string& name, const std::vector<geometry::TorusPoint>& pts,
                      const std::string& tag = "") {
  CsvTable t{name, {"orbit", "i", "x", "y"}, {}};
  for (std::size_t i = 0; i < pts.size(); ++i)
    t.rows.push_back({tag, std::to_string(i), fmt(pts[i].x), fmt(pts[i].y)});
  return t;
}

rotation::RotationHull plain_hull(const dynamics::LiftedMap& f, int grid, long horizon, int threads) {
  rotation::HullOptions o;
  o.threads = threads;
  return rotation::estimate_rotation_hull(f, grid, horizon, o);
}

// --- hull ---------------------------------------------------------------

void run_hull(const config::ConfigFile& cfg, const RunContext& ctx, ExperimentOutput& out) {
  MapPtr f = map_from(cfg);
  int grid = static_cast<int>(positive_int(cfg, "hull", "grid", 16));
  std::vector<long> horizons;
  if (cfg.has("hull", "horizons")) {
    for (double h : cfg.get_reals("hull", "horizons")) {
      if (!(h >= 1.0) || h != std::floor(h)) config_fail("hull.horizons", "expected positive integers");
      horizons.push_back(static_cast<long>(h));
    }
  } else {
    horizons.push_back(positive_int(cfg, "hull", "horizon", 4096));
  }
  rotation::HullOptions o;
  o.threads = ctx.threads;
  o.keep_samples = true;
  auto hulls = rotation::estimate_rotation_hulls(*f, grid, horizons, o);

  Json hs = Json::array();
  CsvTable verts{"vertices", {"horizon", "k", "x", "y"}, {}};
  CsvTable samples{"samples", {"horizon", "start_x", "start_y", "sample_horizon", "mean_x", "mean_y"}, {}};
  std::ostringstream sum;
  for (const auto& h : hulls) {
    hs.push_back(serialize::to_json(h));
    for (std::size_t k = 0; k < h.hull.size(); ++k) {
      Vec2 v = h.hull.vertices()[k];
      verts.rows.push_back({std::to_string(h.horizon), std::to_string(k), fmt(v.x), fmt(v.y)});
    }
    for (const auto& s : h.samples)
      samples.rows.push_back({std::to_string(h.horizon), fmt(s.start.x), fmt(s.start.y), std::to_string(s.horizon),
                              fmt(s.mean_displacement.x), fmt(s.mean_displacement.y)});
    sum << "horizon " << h.horizon << ": " << h.hull.size() << " vertices, area " << h.hull.area() << "\n";
  }
  out.result["map"] = config::map_spec_text(f->spec());
  out.result["hulls"] = hs;
  out.tables.push_back(std::move(verts));
  out.tables.push_back(std::move(samples));
  if (cfg.has("hull", "trace_start")) {
    Vec2 z = vec_field(cfg, "hull", "trace_start", {});
    long every = positive_int(cfg, "hull", "trace_every", 1);
    CsvTable tr{"trace", {"n", "lift_x", "lift_y", "disp_x", "disp_y"}, {}};
    for (const auto& r : rotation::trace_orbit(*f, z, horizons.back(), every))
      tr.rows.push_back({std::to_string(r.n), fmt(r.lift.x), fmt(r.lift.y), fmt(r.displacement.x),
                         fmt(r.displacement.y)});
    out.tables.push_back(std::move(tr));
  }
  out.summary = sum.str();
}

// --- deviation ----------------------------------------------------------

void run_deviation(const config::ConfigFile& cfg, const RunContext& ctx, ExperimentOutput& out) {
  MapPtr f = map_from(cfg);
  RotationTarget t = target_from(cfg);
  int grid = static_cast<int>(positive_int(cfg, "deviation", "grid", 32));
  long horizon = positive_int(cfg, "deviation", "max_horizon", 1 << 14);
  int hgrid = static_cast<int>(positive_int(cfg, "deviation", "hull_grid", grid));
  long hhor = positive_int(cfg, "deviation", "hull_horizon", horizon);
  std::vector<Vec2> dirs = vec_list(cfg, "deviation", "directions");
  if (dirs.empty()) dirs = {t.perp(), -1.0 * t.perp(), t.vec()};
  rotation::DeviationOptions o;
  o.threads = ctx.threads;
  o.growth_threshold = positive_real(cfg, "deviation", "growth_threshold", o.growth_threshold);
  o.min_doublings = static_cast<int>(positive_int(cfg, "deviation", "min_doublings", o.min_doublings));

  auto hull = plain_hull(*f, hgrid, hhor, ctx.threads);
  auto reps = rotation::measure_deviations(*f, hull.hull, dirs, grid, horizon, o);
  Json rs = Json::array();
  CsvTable cps{"checkpoints", {"direction_x", "direction_y", "n", "sup"}, {}};
  std::ostringstream sum;
  for (const auto& r : reps) {
    rs.push_back(serialize::to_json(r));
    for (const auto& c : r.checkpoints)
      cps.rows.push_back({fmt(r.direction.x), fmt(r.direction.y), std::to_string(c.n), fmt(c.sup)});
    sum << "direction (" << r.direction.x << ", " << r.direction.y << "): sup " << r.sup_deviation << ", "
        << (r.verdict == rotation::Verdict::BoundedUpTo ? "bounded up to " + std::to_string(r.bounded_up_to)
                                                        : "growth detected, rate " + std::to_string(r.rate))
        << "\n";
  }
  out.result["hull"] = serialize::to_json(hull);
  out.result["reports"] = rs;
  out.tables.push_back(std::move(cps));
  out.summary = sum.str();
}

// --- pseudo -------------------------------------------------------------

const std::vector<RegionLabel> kFourLabels = {RegionLabel::Delta1, RegionLabel::Delta0, RegionLabel::Omega1,
                                              RegionLabel::Omega0};

void run_pseudo(const config::ConfigFile& cfg, const RunContext&, ExperimentOutput& out) {
  MapPtr f = map_from(cfg);
  RotationTarget t = target_from(cfg);
  std::string search = cfg.get_string("pseudo", "search", std::string("detect"));
  Vec2 start = vec_field(cfg, "pseudo", "start", {0.1, 0.2});
  std::ostringstream sum;
  out.result["search"] = search;
  if (search == "detect") {
    double eps = positive_real(cfg, "pseudo", "eps", 0.05);
    long horizon = positive_int(cfg, "pseudo", "max_horizon", 1'000'000);
    auto o = pseudo_orbit::detect_pseudo_periodic(*f, geometry::TorusPoint::from(start), eps, horizon);
    out.result["orbit"] = serialize::to_json(o);
    out.tables.push_back(points_table("points", o.points));
    sum << "period " << o.period() << ", displacement (" << o.lift_displacement.x << ", " << o.lift_displacement.y
        << ")\n";
  } else if (search == "rk") {
    double K = positive_real(cfg, "pseudo", "K", 2.0);
    long budget = positive_int(cfg, "pseudo", "budget", 2'000'000);
    std::string dir = cfg.get_string("pseudo", "direction", std::string("forward"));
    if (dir != "forward" && dir != "backward") config_fail("pseudo.direction", "expected forward or backward");
    pseudo_orbit::RKSearchOptions o;
    o.start = geometry::TorusPoint::from(start);
    o.dense = cfg.get_bool("pseudo", "dense", false);
    auto mode = dir == "forward" ? pseudo_orbit::RKMode::Forward : pseudo_orbit::RKMode::Backward;
    auto cs = pseudo_orbit::search_rk_candidates(*f, t, K, budget, mode, o);
    Json a = Json::array();
    CsvTable tab{"candidates", {"x", "y", "horizon", "gap", "gain"}, {}};
    for (const auto& c : cs) {
      a.push_back(serialize::to_json(c));
      tab.rows.push_back({fmt(c.point.x), fmt(c.point.y), std::to_string(c.horizon), fmt(c.recurrence_gap),
                          fmt(c.deviation_gain)});
    }
    out.result["candidates"] = a;
    out.tables.push_back(std::move(tab));
    sum << cs.size() << " candidates\n";
    if (cs.empty()) out.status = exit_code_for(ErrorKind::SearchExhausted);
  } else if (search == "drift") {
    double eps = positive_real(cfg, "pseudo", "eps", 0.05);
    long maxp = positive_int(cfg, "pseudo", "max_period", 1'000'000);
    double mm = cfg.get_real("pseudo", "min_margin", 2e-3);
    double jf = positive_real(cfg, "pseudo", "junction_fraction", 0.8);
    Json a = Json::array();
    CsvTable tab{"points", {"orbit", "i", "x", "y"}, {}};
    for (RegionLabel l : kFourLabels) {
      auto cs = pseudo_orbit::shortest_drift_candidates(t, eps / 8, l, maxp, mm, 1);
      if (cs.empty())
        throw Error(ErrorKind::SearchExhausted, "pseudo-orbit",
                    "no rational vector labelled " + std::string(geometry::to_string(l)));
      auto o = pseudo_orbit::drift_pseudo_orbit(*f, start, cs[0], eps, jf * eps);
      Json j = serialize::to_json(o);
      j["label"] = std::string(geometry::to_string(l));
      a.push_back(j);
      auto pt = points_table("points", o.points, std::string(geometry::to_string(l)));
      tab.rows.insert(tab.rows.end(), pt.rows.begin(), pt.rows.end());
      sum << geometry::to_string(l) << ": period " << o.period() << "\n";
    }
    out.result["orbits"] = a;
    out.tables.push_back(std::move(tab));
  } else {
    config_fail("pseudo.search", "expected detect, rk or drift");
  }
  out.summary = sum.str();
}

// --- close-rigid --------------------------------------------------------

void run_close(const config::ConfigFile& cfg, const RunContext& ctx, ExperimentOutput& out) {
  MapPtr f = map_from(cfg);
  RotationTarget t = target_from(cfg);
  CloseRigidParams p;
  p.eps = positive_real(cfg, "close", "eps", p.eps);
  p.drift_fraction = positive_real(cfg, "close", "drift_fraction", p.drift_fraction);
  p.min_margin = cfg.get_real("close", "min_margin", p.min_margin);
  p.max_period = positive_int(cfg, "close", "max_period", p.max_period);
  p.placement.junction_fraction = positive_real(cfg, "close", "junction_fraction", p.placement.junction_fraction);
  p.placement.separation_fraction =
      positive_real(cfg, "close", "separation_fraction", p.placement.separation_fraction);
  p.placement.trials = static_cast<int>(positive_int(cfg, "close", "trials", p.placement.trials));
  p.verify.samples = static_cast<int>(positive_int(cfg, "close", "samples", p.verify.samples));
  p.hull_margin = cfg.get_real("close", "hull_margin", p.hull_margin);
  p.verify.threads = ctx.threads;
  p.seed = out.seed;
  auto r = close_rigid(f, t, p);
  out.result = to_json(r);

  // rotation hull of g: a coarse grid plus the closed orbits at multiples of their periods
  int hg = static_cast<int>(positive_int(cfg, "close", "hull_grid", 2));
  long hh = positive_int(cfg, "close", "hull_horizon", 2000);
  rotation::HullOptions ho;
  ho.threads = ctx.threads;
  for (const auto& o : r.system.periodic_orbits)
    ho.extra_starts.push_back({o.points.front().vec(), {o.period, 4 * o.period}});
  auto gh = rotation::estimate_rotation_hull(*r.system.map, hg, hh, ho);
  out.result["g_hull"] = serialize::to_json(gh);
  out.result["g_hull_target_margin"] = gh.hull.signed_margin(t.vec());

  out.extra_json.push_back({"closed_system", serialize::to_json(r.system)});
  CsvTable jt{"junctions", {"orbit", "index", "source_x", "source_y", "destination_x", "destination_y", "radius"}, {}};
  for (std::size_t i = 0; i < r.plan.junctions.size(); ++i) {
    const auto& j = r.plan.junctions[i];
    jt.rows.push_back({std::to_string(j.orbit), std::to_string(j.index), fmt(j.source.x), fmt(j.source.y),
                       fmt(j.destination.x), fmt(j.destination.y), fmt(r.plan.moves[i].radius())});
  }
  out.tables.push_back(std::move(jt));
  CsvTable pts{"points", {"orbit", "i", "x", "y"}, {}};
  for (std::size_t k = 0; k < r.system.periodic_orbits.size(); ++k) {
    auto t2 = points_table("points", r.system.periodic_orbits[k].points, std::to_string(k));
    pts.rows.insert(pts.rows.end(), t2.rows.begin(), t2.rows.end());
  }
  out.tables.push_back(std::move(pts));

  std::ostringstream sum;
  for (std::size_t k = 0; k < r.candidates.size(); ++k)
    sum << geometry::to_string(kFourLabels[k]) << ": period " << r.candidates[k].period << ", vector ("
        << r.candidates[k].lift_displacement.x << ", " << r.candidates[k].lift_displacement.y << ")/"
        << r.candidates[k].period << "\n";
  sum << "moves " << r.plan.moves.size() << ", sampled C0 " << r.report.c0_distance << " (eps " << p.eps << ")\n"
      << "max closure error " << r.report.max_closure_error << "\n"
      << "target margin in the rational hull " << r.hull_margin << "\n"
      << (r.passed ? "closing checks passed\n" : "closing checks FAILED\n");
  out.summary = sum.str();
  if (!r.passed) out.status = exit_code_for(ErrorKind::Closing);
}

// --- grow ---------------------------------------------------------------

void run_grow(const config::ConfigFile& cfg, const RunContext& ctx, ExperimentOutput& out, geometry::RegionMode mode) {
  MapPtr f = map_from(cfg);
  RotationTarget t = target_from(cfg);
  double eps = positive_real(cfg, "grow", "eps", 0.1);
  chain::ChainOptions o;
  o.mode = mode;
  o.seed = out.seed;
  o.avoid = f->known_fixed_points();
  std::string strat = cfg.get_string("grow", "strategy", std::string("auto"));
  if (strat == "auto") o.strategy = chain::ChainStrategy::Auto;
  else if (strat == "case_one") o.strategy = chain::ChainStrategy::CaseOneOnly;
  else if (strat == "ladder") o.strategy = chain::ChainStrategy::LadderOnly;
  else config_fail("grow.strategy", "expected auto, case_one or ladder");
  auto& b = o.budgets;
  b.rk_K = positive_real(cfg, "grow", "rk_K", b.rk_K);
  b.rk_budget = positive_int(cfg, "grow", "rk_budget", b.rk_budget);
  b.recurrence_horizon = positive_int(cfg, "grow", "recurrence_horizon", b.recurrence_horizon);
  b.max_ladder_steps = static_cast<int>(positive_int(cfg, "grow", "max_ladder_steps", b.max_ladder_steps));
  b.case_one_horizon = positive_int(cfg, "grow", "case_one_horizon", b.case_one_horizon);
  b.large_budget = positive_int(cfg, "grow", "large_budget", b.large_budget);

  auto r = chain::chain_segments(*f, t, eps, o);
  out.result = serialize::to_json(r);
  CsvTable led{"ledger", {"chain", "junction", "from", "to", "gap", "perp_jump", "par_jump"}, {}};
  CsvTable segs{"segments", {"chain", "segment", "anchor_x", "anchor_y", "n_start", "n_end", "large", "perp_drift",
                             "par_deviation"}, {}};
  std::ostringstream sum;
  sum << (r.used == chain::ChainCase::CaseOne ? "case one" : "ladder") << ", " << r.chains.size() << " loops\n";
  for (std::size_t c = 0; c < r.chains.size(); ++c) {
    const auto& ch = r.chains[c];
    for (std::size_t k = 0; k < ch.junctions.size(); ++k) {
      const auto& j = ch.junctions[k];
      led.rows.push_back({std::to_string(c), std::to_string(k), std::to_string(j.from), std::to_string(j.to),
                          fmt(j.gap), fmt(j.perp_jump), fmt(j.par_jump)});
    }
    for (std::size_t k = 0; k < ch.segments.size(); ++k) {
      const auto& s = ch.segments[k];
      segs.rows.push_back({std::to_string(c), std::to_string(k), fmt(s.anchor.x), fmt(s.anchor.y),
                           std::to_string(s.n_start), std::to_string(s.n_end), s.large ? "1" : "0",
                           fmt(s.perp_drift), fmt(s.par_deviation)});
    }
    Vec2 v = ch.candidate_vector();
    sum << "loop " << c << ": period " << ch.period << ", vector (" << v.x << ", " << v.y << "), label "
        << geometry::to_string(ch.label) << ", margin " << ch.region_margin << "\n";
  }
  out.tables.push_back(std::move(led));
  out.tables.push_back(std::move(segs));

  if (cfg.get_bool("grow", "close", false)) {
    std::vector<pseudo_orbit::PseudoPeriodicOrbit> orbs;
    for (const auto& ch : r.chains) orbs.push_back(chain::to_pseudo_orbit(*f, ch));
    closing::ClosingOptions co;
    co.seed = out.seed;
    auto plan = closing::plan_closing(*f, std::move(orbs), eps, co);
    auto sys = closing::execute_closing(f, plan);
    closing::VerifyOptions vo;
    vo.samples = static_cast<int>(positive_int(cfg, "grow", "samples", vo.samples));
    vo.threads = ctx.threads;
    vo.seed = out.seed;
    auto rep = closing::verify_closed_system(sys, *f, vo);
    out.result["closing"] = {{"plan", serialize::to_json(plan)}, {"verify", serialize::to_json(rep)}};
    out.extra_json.push_back({"closed_system", serialize::to_json(sys)});
    bool ok = rep.c0_distance < eps && rep.max_closure_error < 1e-9;
    sum << "closing: C0 " << rep.c0_distance << ", closure " << rep.max_closure_error << (ok ? "" : " FAILED")
        << "\n";
    if (!ok) out.status = exit_code_for(ErrorKind::Closing);
  }
  out.summary = sum.str();
}

// --- certify ------------------------------------------------------------

void run_certify(const config::ConfigFile& cfg, const RunContext& ctx, ExperimentOutput& out) {
  MapPtr f = map_from(cfg);
  std::vector<certify::PeriodicCurve> curves;
  if (cfg.has("certify", "curve_file")) {
    Json j = serialize::parse_file(cfg.get_string("certify", "curve_file"));
    if (j.is_object()) j = Json::array({j});
    for (const auto& c : j) curves.push_back(serialize::curve_from(c));
  }
  Vec2 through = vec_field(cfg, "certify", "through", {0.0, 0.0});
  double amp = cfg.get_real("certify", "amplitude", 0.0);
  try {
    for (Vec2 d : vec_list(cfg, "certify", "directions"))
      curves.push_back(amp == 0.0 ? certify::straight_curve(d, through) : certify::sinusoid_curve(d, through, amp));
  } catch (const Error& e) {
    config_fail("certify.directions", e.what());
  }
  if (curves.empty()) config_fail("certify.directions", "no curves given");
  int res = static_cast<int>(positive_int(cfg, "certify", "resolution", 64));
  if (res < 2) config_fail("certify.resolution", "must be at least 2");

  std::vector<certify::BrouwerCertificate> certs;
  Json cj = Json::array();
  CsvTable tab{"certificates", {"curve", "direction_x", "direction_y", "verdict", "forward_clearance",
                                "backward_clearance"}, {}};
  std::ostringstream sum;
  bool all = true;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    auto c = certify::certify_brouwer_line(*f, curves[i], res);
    all = all && c.verdict;
    cj.push_back(serialize::to_json(c));
    tab.rows.push_back({std::to_string(i), fmt(c.curve.direction.x), fmt(c.curve.direction.y),
                        c.verdict ? "1" : "0", fmt(c.min_forward_clearance), fmt(c.min_backward_clearance)});
    sum << "curve " << i << ": " << (c.verdict ? "certified" : "not certified") << ", clearance " << c.clearance()
        << (c.diagnostic.empty() ? "" : " (" + c.diagnostic + ")") << "\n";
    certs.push_back(std::move(c));
  }
  out.result["certificates"] = cj;
  out.tables.push_back(std::move(tab));
  if (!all) {
    out.summary = sum.str();
    out.status = exit_code_for(ErrorKind::Certification);
    return;
  }

  int hg = static_cast<int>(positive_int(cfg, "certify", "hull_grid", 8));
  long hh = positive_int(cfg, "certify", "hull_horizon", 1024);
  auto hull = plain_hull(*f, hg, hh, ctx.threads);
  std::vector<Vec2> verts = hull.hull.vertices();
  for (Vec2 v : vec_list(cfg, "certify", "extra_vertices")) verts.push_back(v);
  auto poly = geometry::convex_hull(verts);
  auto cone = certify::cone_confinement_check(certs, poly);
  out.result["hull"] = serialize::to_json(poly);
  out.result["cone"] = serialize::to_json(cone);
  sum << "epsilon0 " << cone.epsilon0 << ", " << cone.violations.size() << " half-plane violations\n";
  bool ok = cone.confined();

  if (cfg.get_bool("certify", "perturb", false)) {
    auto g = dynamics::compose_with_perturbation(
        f, dynamics::CompositePerturbation({dynamics::BumpMove({{0.5, 0.5}, {0.5 + cone.epsilon0 / 2, 0.5}},
                                                               std::min(0.2, std::max(cone.epsilon0, 0.01)))}));
    Json rj = Json::array();
    bool again = true;
    for (const auto& c : curves) {
      auto rc = certify::certify_brouwer_line(*g, c, res);
      again = again && rc.verdict;
      rj.push_back(serialize::to_json(rc));
    }
    out.result["perturbed"] = {{"c0", cone.epsilon0 / 2}, {"certificates", rj}, {"all_certified", again}};
    sum << "after a perturbation of size epsilon0/2: " << (again ? "re-certified" : "certification lost") << "\n";
    ok = ok && again;
  }
  out.summary = sum.str();
  if (!ok) out.status = exit_code_for(ErrorKind::Certification);
}

// --- replay -------------------------------------------------------------

void run_replay(const config::ConfigFile& cfg, const RunContext& ctx, ExperimentOutput& out) {
  std::string path = ctx.input ? *ctx.input : cfg.get_string("replay", "system");
  auto sys = serialize::closed_system_from(serialize::parse_file(path));
  closing::VerifyOptions vo;
  vo.samples = static_cast<int>(positive_int(cfg, "replay", "samples", vo.samples));
  vo.threads = ctx.threads;
  vo.seed = out.seed;
  auto rep = closing::verify_closed_system(sys, *sys.original, vo);
  out.result["system"] = path;
  out.result["verify"] = serialize::to_json(rep);
  bool ok = rep.c0_distance < sys.epsilon && rep.max_closure_error < 1e-9;
  out.result["passed"] = ok;
  std::ostringstream sum;
  sum << "C0 " << rep.c0_distance << " (eps " << sys.epsilon << "), closure " << rep.max_closure_error << ", "
      << (ok ? "passed" : "FAILED") << "\n";
  out.summary = sum.str();
  if (!ok) out.status = exit_code_for(ErrorKind::Closing);
}

}  // namespace

Format parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "both") return Format::Both;
  throw Error(ErrorKind::Config, "cli", "--format: expected json, csv or both");
}

CloseRigidResult close_rigid(MapPtr f, const RotationTarget& target, const CloseRigidParams& p) {
  CloseRigidResult r;
  for (RegionLabel l : kFourLabels) {
    auto cs = pseudo_orbit::shortest_drift_candidates(target, p.drift_fraction * p.eps, l, p.max_period,
                                                      p.min_margin, 1);
    if (cs.empty())
      throw Error(ErrorKind::SearchExhausted, "pseudo-orbit",
                  "no return displacement labelled " + std::string(geometry::to_string(l)));
    r.candidates.push_back(cs[0]);
  }
  auto placement = p.placement;
  placement.seed = p.seed;
  auto orbits = closing::place_drift_orbits(*f, r.candidates, p.eps, placement);
  auto copts = p.closing;
  copts.seed = p.seed;
  r.plan = closing::plan_closing(*f, std::move(orbits), p.eps, copts);
  r.system = closing::execute_closing(f, r.plan);
  auto vopts = p.verify;
  vopts.seed = p.seed;
  r.report = closing::verify_closed_system(r.system, *f, vopts);
  std::vector<Vec2> vs;
  for (const auto& o : r.system.periodic_orbits) vs.push_back(o.rational_vector);
  r.rational_hull = geometry::convex_hull(vs);
  r.hull_margin = r.rational_hull.signed_margin(target.vec());
  r.passed = r.report.c0_distance < p.eps && r.report.max_closure_error < 1e-9 && r.hull_margin > p.hull_margin;
  return r;
}

Json to_json(const CloseRigidResult& r) {
  Json j;
  Json cs = Json::array();
  for (std::size_t k = 0; k < r.candidates.size(); ++k) {
    Json c = serialize::to_json(r.candidates[k]);
    c["label"] = std::string(geometry::to_string(kFourLabels[k]));
    cs.push_back(c);
  }
  j["candidates"] = cs;
  j["plan"] = serialize::to_json(r.plan);
  j["verify"] = serialize::to_json(r.report);
  Json rv = Json::array();
  for (const auto& o : r.system.periodic_orbits)
    rv.push_back({{"period", o.period},
                  {"lift_displacement", serialize::to_json(o.lift_displacement)},
                  {"rational_vector", serialize::to_json(o.rational_vector)}});
  j["periodic_orbits"] = rv;
  j["rational_hull"] = serialize::to_json(r.rational_hull);
  j["target_margin"] = r.hull_margin;
  j["passed"] = r.passed;
  return j;
}

ExperimentOutput run_experiment(const std::string& command, const config::ConfigFile& cfg, const RunContext& ctx) {
  static const std::map<std::string, std::set<std::string>> kinds = {
      {"hull", {"hull"}},
      {"deviation", {"deviation"}},
      {"pseudo", {"pseudo"}},
      {"close", {"close-rigid", "close"}},
      {"grow", {"grow-segment", "grow-origin", "grow"}},
      {"certify", {"certify"}},
      {"replay", {"replay"}},
  };
  auto it = kinds.find(command);
  if (it == kinds.end()) throw Error(ErrorKind::Config, "cli", "unknown subcommand '" + command + "'");
  check_sections(cfg);
  std::string kind = cfg.get_string("experiment", "kind", *it->second.begin());
  if (!it->second.count(kind))
    config_fail("experiment.kind", "'" + kind + "' does not match the subcommand '" + command + "'");

  ExperimentOutput out;
  out.name = command;
  long long s = cfg.get_int("experiment", "seed", 1);
  if (s < 0) config_fail("experiment.seed", "must be non-negative");
  out.seed = ctx.seed ? *ctx.seed : static_cast<std::uint64_t>(s);
  out.config_hash = config::fnv1a_hex(cfg.canonical());
  if (ctx.threads < 1) throw Error(ErrorKind::Config, "cli", "--threads must be positive");

  auto t0 = Clock::now();
  if (command == "hull") run_hull(cfg, ctx, out);
  else if (command == "deviation") run_deviation(cfg, ctx, out);
  else if (command == "pseudo") run_pseudo(cfg, ctx, out);
  else if (command == "close") run_close(cfg, ctx, out);
  else if (command == "grow") {
    std::string m = cfg.get_string("grow", "mode", kind == "grow-origin" ? std::string("origin") : std::string("segment"));
    if (m != "segment" && m != "origin") config_fail("grow.mode", "expected segment or origin");
    if ((kind == "grow-origin" && m != "origin") || (kind == "grow-segment" && m != "segment"))
      config_fail("grow.mode", "contradicts experiment.kind");
    run_grow(cfg, ctx, out, m == "origin" ? geometry::RegionMode::Origin : geometry::RegionMode::Segment);
  } else if (command == "certify") run_certify(cfg, ctx, out);
  else run_replay(cfg, ctx, out);

  Json wrapped;
  wrapped["experiment"] = kind;
  wrapped["config_hash"] = out.config_hash;
  wrapped["seed"] = out.seed;
  wrapped["status"] = out.status;
  wrapped["result"] = std::move(out.result);
  out.result = std::move(wrapped);
  for (auto& [name, j] : out.extra_json) {
    Json w;
    w["config_hash"] = out.config_hash;
    w["seed"] = out.seed;
    for (auto& [k, v] : j.items()) w[k] = v;
    j = std::move(w);
  }
  std::ostringstream head;
  head << "experiment " << kind << ", seed " << out.seed << ", config " << out.config_hash << "\n";
  out.summary = head.str() + out.summary;
  out.summary += "elapsed " + std::to_string(seconds_since(t0)) + " s\n";
  return out;
}

std::string csv_text(const CsvTable& t, const ExperimentOutput& owner) {
  std::string s = "# config_hash=" + owner.config_hash + " seed=" + std::to_string(owner.seed) + "\n";
  for (std::size_t i = 0; i < t.header.size(); ++i) s += (i ? "," : "") + t.header[i];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
    s += "\n";
  }
  return s;
}

void write_outputs(const ExperimentOutput& out, const std::string& dir, Format format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Config, "output", "cannot create " + dir + ": " + ec.message());
  auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream o(std::filesystem::path(dir) / file, std::ios::binary);
    if (!o) throw Error(ErrorKind::Config, "output", "cannot write " + file);
    o << text;
  };
  if (format != Format::Csv) {
    write(out.name + ".json", serialize::dump(out.result));
    for (const auto& [name, j] : out.extra_json) write(out.name + "_" + name + ".json", serialize::dump(j));
  }
  if (format != Format::Json)
    for (const auto& t : out.tables) write(out.name + "_" + t.name + ".csv", csv_text(t, out));
  write(out.name + "_summary.txt", out.summary);
}

}  // namespace rotlab::experiments
