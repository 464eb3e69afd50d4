#include "rotlab/serialize.hpp"

#include <fstream>
#include <sstream>

#include "rotlab/config.hpp"
#include "rotlab/error.hpp"

namespace rotlab::serialize {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
  throw Error(ErrorKind::Config, "json", field + ": " + msg);
}

const Json& field(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) bad(key, "missing");
  return j.at(key);
}

double real_from(const Json& j, const std::string& name) {
  if (!j.is_number()) bad(name, "expected a number");
  return j.get<double>();
}

Json points_json(const std::vector<geometry::TorusPoint>& pts) {
  Json a = Json::array();
  for (auto p : pts) a.push_back(to_json(p.vec()));
  return a;
}

std::vector<geometry::TorusPoint> points_from(const Json& j, const std::string& name) {
  if (!j.is_array()) bad(name, "expected an array");
  std::vector<geometry::TorusPoint> out;
  for (const auto& p : j) {
    Vec2 v = vec_from(p);
    out.push_back({v.x, v.y});
  }
  return out;
}

}  // namespace

Json to_json(Vec2 v) { return Json::array({v.x, v.y}); }

Vec2 vec_from(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) bad("vector", "expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json to_json(const geometry::ConvexPolygon& p) {
  Json v = Json::array();
  for (Vec2 q : p.vertices()) v.push_back(to_json(q));
  return v;
}

Json to_json(const rotation::RotationHull& h) {
  Json j;
  j["vertices"] = to_json(h.hull);
  j["horizon"] = h.horizon;
  j["grid_density"] = h.grid_density;
  j["area"] = h.hull.area();
  return j;
}

Json to_json(const rotation::DeviationReport& r) {
  Json j;
  j["direction"] = to_json(r.direction);
  j["sup_deviation"] = r.sup_deviation;
  j["argmax_start"] = to_json(r.argmax_start);
  j["argmax_horizon"] = r.argmax_horizon;
  if (r.verdict == rotation::Verdict::BoundedUpTo) {
    j["verdict"] = "BoundedUpTo";
    j["bounded_up_to"] = r.bounded_up_to;
  } else {
    j["verdict"] = "GrowthDetected";
  }
  j["rate"] = r.rate;
  j["hull_support"] = r.hull_support;
  Json cps = Json::array();
  for (const auto& c : r.checkpoints) cps.push_back({{"n", c.n}, {"sup", c.sup}});
  j["checkpoints"] = cps;
  return j;
}

Json to_json(const pseudo_orbit::PseudoPeriodicOrbit& o, std::size_t max_points) {
  Json j;
  j["period"] = o.period();
  j["epsilon"] = o.epsilon;
  j["lift_displacement"] = to_json(o.lift_displacement);
  j["candidate_vector"] = to_json(o.candidate_vector);
  if (o.period() <= max_points) j["points"] = points_json(o.points);
  return j;
}

Json to_json(const pseudo_orbit::RKCandidate& c) {
  Json j;
  j["point"] = to_json(c.point.vec());
  j["horizon"] = c.horizon;
  j["recurrence_gap"] = c.recurrence_gap;
  j["deviation_gain"] = c.deviation_gain;
  j["lift_displacement"] = to_json(c.lift_displacement);
  return j;
}

Json to_json(const pseudo_orbit::DriftCandidate& c) {
  Json j;
  j["period"] = c.period;
  j["lift_displacement"] = to_json(c.lift_displacement);
  j["margin"] = c.margin;
  return j;
}

Json to_json(const chain::ChainState& c) {
  Json j;
  j["mode"] = c.mode == geometry::RegionMode::Segment ? "segment" : "origin";
  j["target"] = to_json(c.target.vec());
  j["epsilon"] = c.epsilon;
  j["closed"] = c.closed;
  j["period"] = c.period;
  j["lift_displacement"] = to_json(c.lift_displacement);
  j["candidate_vector"] = to_json(c.candidate_vector());
  j["label"] = std::string(geometry::to_string(c.label));
  j["region_margin"] = c.region_margin;
  j["cumulative_perp_drift"] = c.cumulative_perp_drift;
  j["cumulative_par_deviation"] = c.cumulative_par_deviation;
  j["ledger"] = {{"perp", c.ledger_perp()},
                 {"par", c.ledger_par()},
                 {"total_perp", c.total_perp()},
                 {"total_par", c.total_par()}};
  Json segs = Json::array();
  for (const auto& s : c.segments)
    segs.push_back({{"anchor", to_json(s.anchor.vec())},
                    {"n_start", s.n_start},
                    {"n_end", s.n_end},
                    {"start_lift", to_json(s.start_lift)},
                    {"end_lift", to_json(s.end_lift)},
                    {"large", s.large},
                    {"perp_drift", s.perp_drift},
                    {"par_deviation", s.par_deviation}});
  j["segments"] = segs;
  Json juns = Json::array();
  for (const auto& k : c.junctions)
    juns.push_back({{"from", k.from},
                    {"to", k.to},
                    {"source_lift", to_json(k.source_lift)},
                    {"destination_lift", to_json(k.destination_lift)},
                    {"gap", k.gap},
                    {"perp_jump", k.perp_jump},
                    {"par_jump", k.par_jump}});
  j["junctions"] = juns;
  return j;
}

Json to_json(const chain::ChainResult& r) {
  Json j;
  j["case"] = r.used == chain::ChainCase::CaseOne ? "case_one" : "ladder";
  j["x_star"] = to_json(r.x_star.vec());
  j["x_star_gain"] = r.x_star_gain;
  j["ladder_steps"] = r.ladder_steps;
  Json cs = Json::array();
  for (const auto& c : r.chains) cs.push_back(to_json(c));
  j["chains"] = cs;
  return j;
}

Json to_json(const closing::ClosingPlan& p) {
  Json j;
  j["epsilon"] = p.epsilon;
  j["total_c0"] = p.total_c0;
  j["min_clearance"] = p.min_clearance;
  j["orbits"] = p.orbits.size();
  Json juns = Json::array();
  for (std::size_t i = 0; i < p.junctions.size(); ++i) {
    const auto& k = p.junctions[i];
    juns.push_back({{"orbit", k.orbit},
                    {"index", k.index},
                    {"source", to_json(k.source)},
                    {"destination", to_json(k.destination)},
                    {"radius", p.moves[i].radius()},
                    {"submoves", p.moves[i].submoves()}});
  }
  j["junctions"] = juns;
  return j;
}

Json to_json(const closing::VerifyReport& r) {
  Json j;
  j["c0_distance"] = r.c0_distance;
  j["declared_c0"] = r.declared_c0;
  j["closure_errors"] = r.closure_errors;
  j["max_closure_error"] = r.max_closure_error;
  j["locality_error"] = r.locality_error;
  j["inverse_error"] = r.inverse_error;
  j["fixed_point_error"] = r.fixed_point_error;
  j["support_samples"] = r.support_samples;
  return j;
}

Json to_json(const dynamics::BumpMove& m) {
  Json path = Json::array();
  for (Vec2 p : m.path()) path.push_back(to_json(p));
  return {{"path", path}, {"radius", m.radius()}, {"submoves", m.submoves()}};
}

dynamics::BumpMove bump_move_from(const Json& j) {
  std::vector<Vec2> path;
  const auto& p = field(j, "path");
  if (!p.is_array()) bad("path", "expected an array");
  for (const auto& q : p) path.push_back(vec_from(q));
  double r = real_from(field(j, "radius"), "radius");
  const auto& k = field(j, "submoves");
  if (!k.is_number_integer()) bad("submoves", "expected an integer");
  try {
    return dynamics::BumpMove(std::move(path), r, k.get<int>());
  } catch (const Error& e) {
    bad("move", e.what());
  }
}

Json to_json(const dynamics::CompositePerturbation& p) {
  Json a = Json::array();
  for (const auto& m : p.moves()) a.push_back(to_json(m));
  return {{"c0_distance", p.c0_distance()}, {"moves", a}};
}

dynamics::CompositePerturbation perturbation_from(const Json& j) {
  const auto& a = field(j, "moves");
  if (!a.is_array()) bad("moves", "expected an array");
  std::vector<dynamics::BumpMove> moves;
  for (const auto& m : a) moves.push_back(bump_move_from(m));
  return dynamics::CompositePerturbation(std::move(moves));
}

Json to_json(const closing::ClosedSystem& s) {
  if (!s.original || !s.original->has_spec())
    throw Error(ErrorKind::InvalidArgument, "json", "the original map has no spec");
  Json j;
  j["map"] = config::map_spec_text(s.original->spec());
  j["epsilon"] = s.epsilon;
  j["perturbation"] = to_json(s.perturbation);
  Json orbs = Json::array();
  for (const auto& o : s.periodic_orbits)
    orbs.push_back({{"period", o.period},
                    {"lift_displacement", to_json(o.lift_displacement)},
                    {"rational_vector", to_json(o.rational_vector)},
                    {"points", points_json(o.points)}});
  j["periodic_orbits"] = orbs;
  return j;
}

closing::ClosedSystem closed_system_from(const Json& j) {
  const auto& spec = field(j, "map");
  if (!spec.is_string()) bad("map", "expected map spec text");
  dynamics::MapPtr f = dynamics::make_map(config::parse_map_spec_text(spec.get<std::string>()));
  auto pert = perturbation_from(field(j, "perturbation"));
  std::vector<closing::PeriodicOrbitRecord> orbs;
  const auto& a = field(j, "periodic_orbits");
  if (!a.is_array()) bad("periodic_orbits", "expected an array");
  for (const auto& o : a) {
    closing::PeriodicOrbitRecord r;
    const auto& per = field(o, "period");
    if (!per.is_number_integer()) bad("period", "expected an integer");
    r.period = per.get<long>();
    r.lift_displacement = vec_from(field(o, "lift_displacement"));
    r.rational_vector = vec_from(field(o, "rational_vector"));
    r.points = points_from(field(o, "points"), "points");
    if (r.period <= 0 || static_cast<std::size_t>(r.period) != r.points.size())
      bad("period", "does not match the point count");
    orbs.push_back(std::move(r));
  }
  return closing::make_closed_system(f, std::move(pert), std::move(orbs), real_from(field(j, "epsilon"), "epsilon"));
}

Json to_json(const certify::PeriodicCurve& c) {
  Json p = Json::array();
  for (Vec2 q : c.fundamental_polyline) p.push_back(to_json(q));
  return {{"direction", to_json(c.direction)}, {"polyline", p}};
}

certify::PeriodicCurve curve_from(const Json& j) {
  certify::PeriodicCurve c;
  c.direction = vec_from(field(j, "direction"));
  const auto& p = field(j, "polyline");
  if (!p.is_array()) bad("polyline", "expected an array");
  for (const auto& q : p) c.fundamental_polyline.push_back(vec_from(q));
  try {
    c.validate();
  } catch (const Error& e) {
    bad("curve", e.what());
  }
  return c;
}

Json to_json(const certify::BrouwerCertificate& c) {
  Json j;
  j["curve"] = to_json(c.curve);
  j["verdict"] = c.verdict;
  j["min_forward_clearance"] = c.min_forward_clearance;
  j["min_backward_clearance"] = c.min_backward_clearance;
  j["forward_side"] = c.forward_side;
  j["backward_side"] = c.backward_side;
  j["samples"] = c.samples;
  j["ambiguous"] = c.ambiguous;
  j["diagnostic"] = c.diagnostic;
  return j;
}

Json to_json(const certify::ConeReport& r) {
  Json j;
  j["confined"] = r.confined();
  j["epsilon0"] = r.epsilon0;
  j["min_projection"] = r.min_projection;
  Json v = Json::array();
  for (const auto& x : r.violations)
    v.push_back({{"curve", x.curve}, {"vertex", to_json(x.vertex)}, {"value", x.value}});
  j["violations"] = v;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "json", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Config, "json", path + ": " + e.what());
  }
}

}  // namespace rotlab::serialize
