#pragma once

#include <string>
#include <vector>

#include "rotlab/dynamics.hpp"
#include "rotlab/geometry.hpp"
#include "rotlab/rotation.hpp"

namespace rotlab::certify {

using dynamics::LiftedMap;
using geometry::ConvexPolygon;
using geometry::Vec2;

// One period of a curve invariant under translation by the integer vector
// (a,b): back() - front() == (a,b) exactly.
struct PeriodicCurve {
  Vec2 direction;
  std::vector<Vec2> fundamental_polyline;

  // InvalidArgument unless (a,b) is a coprime integer vector, the endpoint
  // offset is exact and the concatenation over +-2 translates is simple.
  void validate() const;
  PeriodicCurve translated(Vec2 m) const;
};

// the line through `through` with direction (a,b), split into `pieces` segments
PeriodicCurve straight_curve(Vec2 direction, Vec2 through = {0.0, 0.0}, int pieces = 1);
// straight_curve plus amplitude * sin(2 pi s) (s the period fraction) along the left normal
PeriodicCurve sinusoid_curve(Vec2 direction, Vec2 through, double amplitude, int pieces = 64);

inline constexpr double kAmbiguityBand = 1e-9;

// Side of p relative to the oriented bi-infinite curve: +1 left, -1 right,
// 0 within the ambiguity band.
int side_of(const PeriodicCurve& c, Vec2 p, double band = kAmbiguityBand);
// distance from p to the bi-infinite curve
double distance_to_curve(const PeriodicCurve& c, Vec2 p);

struct BrouwerCertificate {
  PeriodicCurve curve;
  double min_forward_clearance = 0.0;
  double min_backward_clearance = 0.0;
  int forward_side = 0;  // side holding f(curve) when decided
  int backward_side = 0;
  bool verdict = false;
  long samples = 0;
  long ambiguous = 0;
  std::string diagnostic;

  double clearance() const { return std::min(min_forward_clearance, min_backward_clearance); }
  // unit normal toward the forward side
  Vec2 forward_normal() const;
};

// resolution: samples per unit length along the fundamental polyline (>= 2)
BrouwerCertificate certify_brouwer_line(const LiftedMap& f, const PeriodicCurve& curve, int resolution = 64);

struct HalfPlaneViolation {
  std::size_t curve = 0;
  Vec2 vertex;
  double value = 0.0;  // <vertex, forward normal>
};

struct ConeReport {
  std::vector<double> min_projection;  // per curve, over hull vertices
  std::vector<HalfPlaneViolation> violations;
  double epsilon0 = 0.0;  // min clearance over the curves
  bool confined() const { return violations.empty(); }
};

// Certification error when a certificate has a false verdict.
ConeReport cone_confinement_check(const std::vector<BrouwerCertificate>& certs, const ConvexPolygon& hull,
                                  double tol = 1e-9);

}  // namespace rotlab::certify
