#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace rotlab::geometry {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  // Throws InvalidArgument on non-finite input. Plain aggregate init is used
  // in hot loops; boundaries call this.
  static Vec2 checked(double x, double y);

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
  friend bool operator==(Vec2, Vec2) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline Vec2 floor(Vec2 a) { return {std::floor(a.x), std::floor(a.y)}; }

struct RotationTarget {
  double alpha = 0.0;
  double beta = 0.0;
  bool totally_irrational = false;

  RotationTarget() = default;
  RotationTarget(double a, double b, bool irrational = false);

  // ((sqrt 5 - 1)/2, sqrt 2 - 1), flagged totally irrational.
  static RotationTarget golden_silver();

  Vec2 vec() const { return {alpha, beta}; }
  // (-beta, alpha)
  Vec2 perp() const { return {-beta, alpha}; }
};

// No relation p + q alpha + r beta = 0 with integer |p|,|q|,|r| <= bound
// holds within tol. Desk-scale sanity only.
bool spot_check_rational_independence(const RotationTarget& t, int bound = 1000,
                                      double tol = 1e-9);

struct TorusPoint {
  double x = 0.0;
  double y = 0.0;

  static TorusPoint from(Vec2 z);
  Vec2 vec() const { return {x, y}; }
  friend bool operator==(TorusPoint, TorusPoint) = default;
};

double reduce_unit(double v);
// Shortest representative of b - a modulo Z^2.
Vec2 torus_delta(Vec2 a, Vec2 b);
double torus_distance(Vec2 a, Vec2 b);
inline double torus_distance(TorusPoint a, TorusPoint b) {
  return torus_distance(a.vec(), b.vec());
}
// Lift of b closest to the planar point near.
Vec2 nearest_lift(Vec2 near, Vec2 b);

double project_along(Vec2 w, Vec2 r);

enum class RegionLabel { Delta0, Delta1, Omega0, Omega1, D0, D1, Other, Boundary };
// Segment: the four sectors around (alpha, beta). Origin: the sectors D0/D1
// around 0 with pr_t < 0; points with pr_t > 0 are labelled Other.
enum class RegionMode { Segment, Origin };

std::string_view to_string(RegionLabel l);

inline constexpr double kRegionTolerance = 1e-9;

RegionLabel classify_region(const RotationTarget& target, Vec2 r,
                            double tol = kRegionTolerance,
                            RegionMode mode = RegionMode::Segment);

// The two tested quantities of classify_region: (pr_{(-b,a)}, pr_{(a,b)} of
// r - t) in Segment mode, (pr_{(-b,a)}, pr_{(a,b)} of r) in Origin mode.
struct RegionCoordinates {
  double perp = 0.0;
  double par = 0.0;
  double margin() const { return std::min(std::abs(perp), std::abs(par)); }
};
RegionCoordinates region_coordinates(const RotationTarget& target, Vec2 r,
                                     RegionMode mode = RegionMode::Segment);

Vec2 nearest_integer_vector(Vec2 r);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);
bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);
double polyline_length(std::span<const Vec2> pts);
double point_polyline_distance(Vec2 p, std::span<const Vec2> pts);
double polyline_polyline_distance(std::span<const Vec2> a, std::span<const Vec2> b);

class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  // Takes vertices already in strictly convex counterclockwise order.
  explicit ConvexPolygon(std::vector<Vec2> ccw_vertices);

  const std::vector<Vec2>& vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  double area() const;

  // Distance from p to the filled polygon (0 inside).
  double distance(Vec2 p) const;
  // Positive: distance from p to the boundary with p strictly inside.
  // Non-positive: minus the distance to the filled polygon. Degenerate
  // polygons have no interior, so the margin is never positive.
  double signed_margin(Vec2 p) const;
  bool contains(Vec2 p, double tol = 1e-12) const { return distance(p) <= tol; }
  // max over the polygon of <v, w>
  double support(Vec2 w) const;
  ConvexPolygon translated(Vec2 m) const;

 private:
  std::vector<Vec2> v_;
};

inline constexpr double kCollinearTolerance = 1e-12;

ConvexPolygon convex_hull(std::span<const Vec2> points);
ConvexPolygon convex_hull(std::initializer_list<Vec2> points);
double hausdorff_distance(const ConvexPolygon& a, const ConvexPolygon& b);

}  // namespace rotlab::geometry
