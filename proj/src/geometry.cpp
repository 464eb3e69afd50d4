#include "rotlab/geometry.hpp"

#include <algorithm>
#include <limits>

#include "rotlab/error.hpp"

namespace rotlab::geometry {

Vec2 Vec2::checked(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y))
    throw Error(ErrorKind::InvalidArgument, "geometry", "non-finite vector component");
  return {x, y};
}

RotationTarget::RotationTarget(double a, double b, bool irrational)
    : alpha(a), beta(b), totally_irrational(irrational) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw Error(ErrorKind::InvalidArgument, "geometry", "rotation target must be finite");
  if (a == 0.0 && b == 0.0)
    throw Error(ErrorKind::InvalidArgument, "geometry", "rotation target must be nonzero");
}

RotationTarget RotationTarget::golden_silver() {
  return RotationTarget((std::sqrt(5.0) - 1.0) / 2.0, std::sqrt(2.0) - 1.0, true);
}

bool spot_check_rational_independence(const RotationTarget& t, int bound, double tol) {
  for (int q = -bound; q <= bound; ++q) {
    for (int r = -bound; r <= bound; ++r) {
      if (q == 0 && r == 0) continue;
      double s = q * t.alpha + r * t.beta;
      double p = -std::nearbyint(s);
      if (std::abs(p) > bound) continue;
      if (std::abs(p + s) < tol) return false;
    }
  }
  return true;
}

double reduce_unit(double v) {
  double r = v - std::floor(v);
  // v slightly negative rounds to exactly 1.0
  if (r >= 1.0) r = 0.0;
  return r;
}

TorusPoint TorusPoint::from(Vec2 z) {
  if (!z.finite())
    throw Error(ErrorKind::InvalidArgument, "geometry", "non-finite torus point");
  return {reduce_unit(z.x), reduce_unit(z.y)};
}

Vec2 torus_delta(Vec2 a, Vec2 b) {
  Vec2 d = b - a;
  d.x -= std::nearbyint(d.x);
  d.y -= std::nearbyint(d.y);
  return d;
}

double torus_distance(Vec2 a, Vec2 b) { return torus_delta(a, b).norm(); }

Vec2 nearest_lift(Vec2 near, Vec2 b) { return near + torus_delta(near, b); }

double project_along(Vec2 w, Vec2 r) {
  if (w.x == 0.0 && w.y == 0.0)
    throw Error(ErrorKind::InvalidArgument, "geometry", "projection direction is zero");
  return dot(r, w);
}

std::string_view to_string(RegionLabel l) {
  switch (l) {
    case RegionLabel::Delta0: return "Delta0";
    case RegionLabel::Delta1: return "Delta1";
    case RegionLabel::Omega0: return "Omega0";
    case RegionLabel::Omega1: return "Omega1";
    case RegionLabel::D0: return "D0";
    case RegionLabel::D1: return "D1";
    case RegionLabel::Other: return "Other";
    case RegionLabel::Boundary: return "Boundary";
  }
  return "?";
}

RegionCoordinates region_coordinates(const RotationTarget& target, Vec2 r, RegionMode mode) {
  Vec2 t = target.vec();
  RegionCoordinates c;
  c.perp = dot(r, target.perp());
  c.par = mode == RegionMode::Segment ? dot(r - t, t) : dot(r, t);
  return c;
}

RegionLabel classify_region(const RotationTarget& target, Vec2 r, double tol, RegionMode mode) {
  if (!(tol > 0.0))
    throw Error(ErrorKind::InvalidArgument, "geometry", "region tolerance must be positive");
  RegionCoordinates c = region_coordinates(target, r, mode);
  if (std::abs(c.perp) <= tol || std::abs(c.par) <= tol) return RegionLabel::Boundary;
  bool up = c.perp > 0.0;
  bool ahead = c.par > 0.0;
  if (mode == RegionMode::Origin) {
    if (ahead) return RegionLabel::Other;
    return up ? RegionLabel::D0 : RegionLabel::D1;
  }
  if (ahead) return up ? RegionLabel::Delta0 : RegionLabel::Omega0;
  return up ? RegionLabel::Delta1 : RegionLabel::Omega1;
}

Vec2 nearest_integer_vector(Vec2 r) {
  // nearbyint under the default rounding mode: ties go to even
  return {std::nearbyint(r.x), std::nearbyint(r.y)};
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 d = b - a;
  double l2 = d.norm2();
  if (l2 == 0.0) return (p - a).norm();
  double s = std::clamp(dot(p - a, d) / l2, 0.0, 1.0);
  return (p - (a + s * d)).norm();
}

namespace {

int orient(Vec2 a, Vec2 b, Vec2 c) {
  double v = cross(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  int o1 = orient(a0, a1, b0), o2 = orient(a0, a1, b1);
  int o3 = orient(b0, b1, a0), o4 = orient(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

double polyline_length(std::span<const Vec2> pts) {
  double s = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) s += (pts[i] - pts[i - 1]).norm();
  return s;
}

double point_polyline_distance(Vec2 p, std::span<const Vec2> pts) {
  if (pts.empty()) return std::numeric_limits<double>::infinity();
  if (pts.size() == 1) return (p - pts[0]).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < pts.size(); ++i)
    best = std::min(best, point_segment_distance(p, pts[i - 1], pts[i]));
  return best;
}

double polyline_polyline_distance(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.size() == 1) return point_polyline_distance(a[0], b);
  if (b.size() == 1) return point_polyline_distance(b[0], a);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < a.size(); ++i)
    for (std::size_t j = 1; j < b.size(); ++j)
      best = std::min(best, segment_segment_distance(a[i - 1], a[i], b[j - 1], b[j]));
  return best;
}

ConvexPolygon::ConvexPolygon(std::vector<Vec2> ccw_vertices) : v_(std::move(ccw_vertices)) {}

double ConvexPolygon::area() const {
  if (v_.size() < 3) return 0.0;
  double a = 0.0;
  for (std::size_t i = 0; i < v_.size(); ++i) a += cross(v_[i], v_[(i + 1) % v_.size()]);
  return 0.5 * a;
}

double ConvexPolygon::distance(Vec2 p) const {
  if (v_.empty()) return std::numeric_limits<double>::infinity();
  if (v_.size() == 1) return (p - v_[0]).norm();
  if (v_.size() == 2) return point_segment_distance(p, v_[0], v_[1]);
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v_.size(); ++i) {
    Vec2 a = v_[i], b = v_[(i + 1) % v_.size()];
    if (cross(b - a, p - a) < 0.0) inside = false;
    best = std::min(best, point_segment_distance(p, a, b));
  }
  return inside ? 0.0 : best;
}

double ConvexPolygon::signed_margin(Vec2 p) const {
  if (v_.size() < 3) return -distance(p);
  double d = distance(p);
  if (d > 0.0) return -d;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v_.size(); ++i) {
    Vec2 a = v_[i], b = v_[(i + 1) % v_.size()];
    best = std::min(best, cross(b - a, p - a) / (b - a).norm());
  }
  return best;
}

double ConvexPolygon::support(Vec2 w) const {
  if (v_.empty())
    throw Error(ErrorKind::InvalidArgument, "geometry", "support of empty polygon");
  double m = -std::numeric_limits<double>::infinity();
  for (Vec2 v : v_) m = std::max(m, dot(v, w));
  return m;
}

ConvexPolygon ConvexPolygon::translated(Vec2 m) const {
  std::vector<Vec2> w = v_;
  for (Vec2& v : w) v += m;
  return ConvexPolygon(std::move(w));
}

ConvexPolygon convex_hull(std::span<const Vec2> points) {
  if (points.empty())
    throw Error(ErrorKind::InvalidArgument, "geometry", "convex hull of empty point set");
  std::vector<Vec2> p(points.begin(), points.end());
  for (Vec2 q : p)
    if (!q.finite())
      throw Error(ErrorKind::InvalidArgument, "geometry", "non-finite hull input");
  std::sort(p.begin(), p.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() == 1) return ConvexPolygon({p[0]});

  std::vector<Vec2> h(2 * p.size());
  std::size_t k = 0;
  auto turn = [](Vec2 o, Vec2 a, Vec2 b) { return cross(a - o, b - o); };
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], p[i]) <= kCollinearTolerance) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && turn(h[k - 2], h[k - 1], p[i]) <= kCollinearTolerance) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  if (h.size() == 2 && h[0] == h[1]) h.resize(1);
  return ConvexPolygon(std::move(h));
}

ConvexPolygon convex_hull(std::initializer_list<Vec2> points) {
  return convex_hull(std::span<const Vec2>(points.begin(), points.size()));
}

double hausdorff_distance(const ConvexPolygon& a, const ConvexPolygon& b) {
  // distance to a convex set is convex, so the sup over a polygon sits at a vertex
  double d = 0.0;
  for (Vec2 v : a.vertices()) d = std::max(d, b.distance(v));
  for (Vec2 v : b.vertices()) d = std::max(d, a.distance(v));
  return d;
}

}  // namespace rotlab::geometry
