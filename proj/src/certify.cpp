#include "rotlab/certify.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "rotlab/error.hpp"

namespace rotlab::certify {

namespace {

// Coordinates along the curve direction (s) and its left normal (h).
struct Frame {
  Vec2 u, n;
  double period;  // |(a,b)|
  explicit Frame(Vec2 d) : period(d.norm()) {
    u = d / period;
    n = {-u.y, u.x};
  }
  Vec2 to_local(Vec2 p) const { return {geometry::dot(p, u), geometry::dot(p, n)}; }
};

struct LocalCurve {
  Frame frame;
  std::vector<Vec2> base;  // vertices of one period except the last, local coordinates
  double s_lo = 0.0, s_hi = 0.0;

  explicit LocalCurve(const PeriodicCurve& c) : frame(c.direction) {
    const auto& P = c.fundamental_polyline;
    base.reserve(P.size());
    for (std::size_t i = 0; i + 1 < P.size(); ++i) base.push_back(frame.to_local(P[i]));
    s_lo = s_hi = base.front().x;
    for (Vec2 q : base) {
      s_lo = std::min(s_lo, q.x);
      s_hi = std::max(s_hi, q.x);
    }
  }

  // the extended polyline over pieces k0..k1 (joints shared exactly)
  std::vector<Vec2> pieces(long k0, long k1) const {
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(k1 - k0 + 1) * base.size() + 1);
    for (long k = k0; k <= k1; ++k)
      for (Vec2 q : base) out.push_back({q.x + k * frame.period, q.y});
    out.push_back({base.front().x + (k1 + 1) * frame.period, base.front().y});
    return out;
  }
  // pieces whose s-range meets [s - reach, s + reach]
  std::pair<long, long> covering(double s, double reach) const {
    const double L = frame.period;
    // a piece spans [s_lo + kL, s_hi + L + kL] including its closing joint
    long k0 = static_cast<long>(std::floor((s - reach - s_hi - L) / L));
    long k1 = static_cast<long>(std::ceil((s + reach - s_lo) / L));
    return {k0, k1};
  }
};

double local_distance(const LocalCurve& lc, Vec2 q) {
  auto [k0, k1] = lc.covering(q.x, 0.0);
  auto near = lc.pieces(k0, k1);
  double d = geometry::point_polyline_distance(q, near);
  auto [j0, j1] = lc.covering(q.x, d);
  if (j0 < k0 || j1 > k1) d = std::min(d, geometry::point_polyline_distance(q, lc.pieces(j0, j1)));
  return d;
}

int local_side(const LocalCurve& lc, Vec2 q) {
  // ray toward h = +inf, half-open crossing rule in s
  auto [k0, k1] = lc.covering(q.x, 0.0);
  auto pts = lc.pieces(k0 - 1, k1 + 1);
  int crossings = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    Vec2 a = pts[i - 1], b = pts[i];
    if ((a.x > q.x) == (b.x > q.x)) continue;
    double h = a.y + (q.x - a.x) * (b.y - a.y) / (b.x - a.x);
    if (h > q.y) ++crossings;
  }
  return crossings % 2 == 0 ? 1 : -1;
}

bool is_integer(double v) { return std::isfinite(v) && v == std::round(v); }

}  // namespace

void PeriodicCurve::validate() const {
  if (!is_integer(direction.x) || !is_integer(direction.y))
    throw Error(ErrorKind::InvalidArgument, "curve", "direction must be an integer vector");
  long a = std::lround(direction.x), b = std::lround(direction.y);
  if (std::gcd(std::labs(a), std::labs(b)) != 1)
    throw Error(ErrorKind::InvalidArgument, "curve", "direction must be a coprime integer vector");
  const auto& P = fundamental_polyline;
  if (P.size() < 2) throw Error(ErrorKind::InvalidArgument, "curve", "polyline needs at least two points");
  for (Vec2 p : P)
    if (!p.finite()) throw Error(ErrorKind::InvalidArgument, "curve", "non-finite polyline point");
  Vec2 off = P.back() - P.front() - direction;
  if (off.norm() > 1e-12 * (1.0 + P.front().norm()))
    throw Error(ErrorKind::InvalidArgument, "curve", "endpoint offset differs from the direction");

  LocalCurve lc(*this);
  const long m = static_cast<long>(lc.base.size());
  auto ext = lc.pieces(-2, 2);  // piece 0 occupies segments [2m, 3m)
  for (long i = 2 * m; i < 3 * m; ++i)
    for (long j = 0; j + 1 < static_cast<long>(ext.size()); ++j) {
      if (std::labs(i - j) <= 1) continue;
      if (geometry::segments_intersect(ext[i], ext[i + 1], ext[j], ext[j + 1]))
        throw Error(ErrorKind::InvalidArgument, "curve", "curve is not simple over its translates");
    }
  for (long i = 0; i + 1 < static_cast<long>(ext.size()); ++i)
    if (!((ext[i + 1] - ext[i]).norm() > 0.0))
      throw Error(ErrorKind::InvalidArgument, "curve", "repeated polyline vertex");
}

PeriodicCurve PeriodicCurve::translated(Vec2 m) const {
  PeriodicCurve c = *this;
  for (Vec2& p : c.fundamental_polyline) p += m;
  return c;
}

PeriodicCurve straight_curve(Vec2 direction, Vec2 through, int pieces) {
  if (pieces < 1) throw Error(ErrorKind::InvalidArgument, "curve", "pieces must be positive");
  PeriodicCurve c;
  c.direction = direction;
  for (int i = 0; i <= pieces; ++i) c.fundamental_polyline.push_back(through + (double(i) / pieces) * direction);
  c.validate();
  return c;
}

PeriodicCurve sinusoid_curve(Vec2 direction, Vec2 through, double amplitude, int pieces) {
  if (pieces < 2) throw Error(ErrorKind::InvalidArgument, "curve", "pieces must be at least two");
  PeriodicCurve c;
  c.direction = direction;
  Vec2 n = Vec2{-direction.y, direction.x} / direction.norm();
  for (int i = 0; i <= pieces; ++i) {
    double s = double(i) / pieces;
    double bump = (i == 0 || i == pieces) ? 0.0 : amplitude * std::sin(2.0 * M_PI * s);
    c.fundamental_polyline.push_back(through + s * direction + bump * n);
  }
  c.validate();
  return c;
}

int side_of(const PeriodicCurve& c, Vec2 p, double band) {
  LocalCurve lc(c);
  Vec2 q = lc.frame.to_local(p);
  if (local_distance(lc, q) < band) return 0;
  return local_side(lc, q);
}

double distance_to_curve(const PeriodicCurve& c, Vec2 p) {
  LocalCurve lc(c);
  return local_distance(lc, lc.frame.to_local(p));
}

Vec2 BrouwerCertificate::forward_normal() const {
  Frame fr(curve.direction);
  return double(forward_side) * fr.n;
}

BrouwerCertificate certify_brouwer_line(const LiftedMap& f, const PeriodicCurve& curve, int resolution) {
  if (resolution < 2) throw Error(ErrorKind::InvalidArgument, "certify", "resolution must be at least 2");
  curve.validate();
  BrouwerCertificate cert;
  cert.curve = curve;
  LocalCurve lc(curve);

  const auto& P = curve.fundamental_polyline;
  std::vector<Vec2> samples;
  for (std::size_t i = 0; i + 1 < P.size(); ++i) {
    Vec2 a = P[i], b = P[i + 1];
    int k = std::max(1, static_cast<int>(std::ceil((b - a).norm() * resolution)));
    for (int j = 0; j < k; ++j) samples.push_back(a + (double(j) / k) * (b - a));
  }
  cert.samples = static_cast<long>(samples.size());

  double fwd = std::numeric_limits<double>::infinity(), bwd = fwd;
  int fs = 0, bs = 0;
  bool fwd_mixed = false, bwd_mixed = false;
  auto classify = [&](Vec2 img, double& clear, int& side, bool& mixed) {
    Vec2 q = lc.frame.to_local(img);
    double d = local_distance(lc, q);
    clear = std::min(clear, d);
    if (d < kAmbiguityBand) {
      ++cert.ambiguous;
      return;
    }
    int s = local_side(lc, q);
    if (side == 0) side = s;
    else if (side != s) mixed = true;
  };
  for (Vec2 z : samples) {
    classify(dynamics::evaluate(f, z), fwd, fs, fwd_mixed);
    classify(dynamics::evaluate_inverse(f, z), bwd, bs, bwd_mixed);
  }
  cert.min_forward_clearance = fwd;
  cert.min_backward_clearance = bwd;
  cert.forward_side = fwd_mixed ? 0 : fs;
  cert.backward_side = bwd_mixed ? 0 : bs;

  std::ostringstream diag;
  if (cert.ambiguous > 0) diag << "ambiguous side: " << cert.ambiguous << " images within 1e-9 of the curve";
  else if (fwd_mixed) diag << "forward images on both sides";
  else if (bwd_mixed) diag << "backward images on both sides";
  else if (fs == bs) diag << "forward and backward images on the same side";
  cert.diagnostic = diag.str();
  cert.verdict = cert.diagnostic.empty() && fs != 0 && bs == -fs;
  return cert;
}

ConeReport cone_confinement_check(const std::vector<BrouwerCertificate>& certs, const ConvexPolygon& hull,
                                  double tol) {
  ConeReport rep;
  rep.epsilon0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const auto& c = certs[i];
    if (!c.verdict)
      throw Error(ErrorKind::Certification, "cone", "curve " + std::to_string(i) + " is not certified");
    rep.epsilon0 = std::min(rep.epsilon0, c.clearance());
    Vec2 nf = c.forward_normal();
    double lo = std::numeric_limits<double>::infinity();
    for (Vec2 v : hull.vertices()) {
      double p = geometry::dot(v, nf);
      lo = std::min(lo, p);
      if (p < -tol) rep.violations.push_back({i, v, p});
    }
    rep.min_projection.push_back(lo);
  }
  if (certs.empty()) rep.epsilon0 = 0.0;
  return rep;
}

}  // namespace rotlab::certify
