#pragma once

#include <string>

#include <json.hpp>

#include "rotlab/certify.hpp"
#include "rotlab/chain.hpp"
#include "rotlab/closing.hpp"
#include "rotlab/pseudo_orbit.hpp"
#include "rotlab/rotation.hpp"

// JSON forms of the result types. Doubles print in shortest round-trip form,
// so values reload bit-identically; keys keep insertion order.
namespace rotlab::serialize {

using Json = nlohmann::ordered_json;
using geometry::Vec2;

Json to_json(Vec2 v);
Vec2 vec_from(const Json& j);

Json to_json(const geometry::ConvexPolygon& p);
Json to_json(const rotation::RotationHull& h);
Json to_json(const rotation::DeviationReport& r);

// points are written when the period is at most max_points
Json to_json(const pseudo_orbit::PseudoPeriodicOrbit& o, std::size_t max_points = 100000);
Json to_json(const pseudo_orbit::RKCandidate& c);
Json to_json(const pseudo_orbit::DriftCandidate& c);

// Segments carry their anchor and index range instead of points.
Json to_json(const chain::ChainState& c);
Json to_json(const chain::ChainResult& r);

Json to_json(const closing::ClosingPlan& p);
Json to_json(const closing::VerifyReport& r);

Json to_json(const dynamics::BumpMove& m);
dynamics::BumpMove bump_move_from(const Json& j);
Json to_json(const dynamics::CompositePerturbation& p);
dynamics::CompositePerturbation perturbation_from(const Json& j);

// original map spec text + perturbation + orbit records. The original map
// must have a spec.
Json to_json(const closing::ClosedSystem& s);
// Rebuilds g from the pair; Config errors name the offending field.
closing::ClosedSystem closed_system_from(const Json& j);

Json to_json(const certify::PeriodicCurve& c);
certify::PeriodicCurve curve_from(const Json& j);
Json to_json(const certify::BrouwerCertificate& c);
Json to_json(const certify::ConeReport& r);

std::string dump(const Json& j);  // two-space indent, trailing newline
Json parse_file(const std::string& path);

}  // namespace rotlab::serialize
