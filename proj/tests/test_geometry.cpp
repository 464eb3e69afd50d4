#include <doctest.h>

#include <cmath>
#include <random>

#include "rotlab/error.hpp"
#include "rotlab/geometry.hpp"

using namespace rotlab;
using namespace rotlab::geometry;

namespace {

// O(n^3) oracle: the hull edges are the point pairs with every other point on
// the left (or on the segment).
std::vector<std::pair<Vec2, Vec2>> brute_force_edges(const std::vector<Vec2>& pts) {
  std::vector<std::pair<Vec2, Vec2>> edges;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      bool ok = true;
      for (std::size_t k = 0; k < pts.size() && ok; ++k) {
        double c = cross(pts[j] - pts[i], pts[k] - pts[i]);
        if (c < 0) ok = false;
        if (c == 0 && (dot(pts[k] - pts[i], pts[k] - pts[j]) > 0) && k != i && k != j) ok = false;
      }
      if (ok) edges.push_back({pts[i], pts[j]});
    }
  return edges;
}

}  // namespace

TEST_CASE("project_along") {
  CHECK(project_along({1, 0}, {3, 4}) == 3.0);
  auto t = RotationTarget::golden_silver();
  CHECK(std::abs(project_along(t.perp(), t.vec())) < 1e-16);
  CHECK(project_along({0.6, 0.8}, {0.7, 0.9}) == doctest::Approx(0.6 * 0.7 + 0.8 * 0.9).epsilon(1e-15));
  CHECK_THROWS_AS(project_along({0, 0}, {1, 1}), Error);
}

TEST_CASE("project_along is bilinear") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    Vec2 w{u(rng), u(rng)}, r{u(rng), u(rng)}, s{u(rng), u(rng)};
    double a = u(rng);
    double lhs = project_along(w, a * r + s);
    double rhs = a * project_along(w, r) + project_along(w, s);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("classify_region examples") {
  RotationTarget t(0.6, 0.8);
  CHECK(classify_region(t, {0.7, 0.9}, 1e-9) == RegionLabel::Omega0);
  CHECK(classify_region(t, {0.6, 0.8}, 1e-9) == RegionLabel::Boundary);
  // -0.8*1.4 + 0.6*1.8 = -0.04 < 0 with a positive parallel part
  CHECK(classify_region(t, {1.4, 1.8}) == RegionLabel::Omega0);
  CHECK(classify_region(t, {1.3, 1.9}) == RegionLabel::Delta0);
  CHECK(classify_region(t, {-0.2, 0.1}) == RegionLabel::Delta1);
  CHECK(classify_region(t, {0.1, -0.2}) == RegionLabel::Omega1);
  CHECK_THROWS_AS(classify_region(t, {1, 1}, 0.0), Error);
}

TEST_CASE("classify_region partition matches the sign patterns") {
  auto t = RotationTarget::golden_silver();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 3);
  int seen[4] = {0, 0, 0, 0};
  for (int i = 0; i < 5000; ++i) {
    Vec2 r{u(rng), u(rng)};
    // independent evaluation of the two quantities
    double p = -t.beta * r.x + t.alpha * r.y;
    double q = t.alpha * (r.x - t.alpha) + t.beta * (r.y - t.beta);
    if (std::abs(p) < 1e-6 || std::abs(q) < 1e-6) continue;
    RegionLabel want = p > 0 ? (q > 0 ? RegionLabel::Delta0 : RegionLabel::Delta1)
                             : (q > 0 ? RegionLabel::Omega0 : RegionLabel::Omega1);
    RegionLabel got = classify_region(t, r);
    CHECK(got == want);
    seen[static_cast<int>(got)]++;
  }
  for (int k : seen) CHECK(k > 0);
}

TEST_CASE("classify_region origin mode") {
  auto t = RotationTarget::golden_silver();
  CHECK(classify_region(t, {-0.1, 0.1}, 1e-9, RegionMode::Origin) == RegionLabel::D0);
  CHECK(classify_region(t, {0.1, -0.3}, 1e-9, RegionMode::Origin) == RegionLabel::D1);
  CHECK(classify_region(t, {0.3, 0.3}, 1e-9, RegionMode::Origin) == RegionLabel::Other);
  CHECK(classify_region(t, {0.0, 0.0}, 1e-9, RegionMode::Origin) == RegionLabel::Boundary);
}

TEST_CASE("nearest_integer_vector") {
  CHECK(nearest_integer_vector({0.9, -1.2}) == Vec2{1, -1});
  CHECK(nearest_integer_vector({0.5, 0.5}) == Vec2{0, 0});
  CHECK(nearest_integer_vector({1.5, -2.5}) == Vec2{2, -2});
  CHECK(nearest_integer_vector({3.0001, -0.4999}) == Vec2{3, 0});
}

TEST_CASE("torus arithmetic") {
  CHECK(torus_distance(Vec2{0.05, 0.5}, Vec2{0.95, 0.5}) == doctest::Approx(0.1));
  Vec2 d = torus_delta({0.9, 0.1}, {0.1, 0.9});
  CHECK(d.x == doctest::Approx(0.2));
  CHECK(d.y == doctest::Approx(-0.2));
  Vec2 l = nearest_lift({5.95, -3.02}, {0.01, 0.99});
  CHECK(l.x == doctest::Approx(6.01));
  CHECK(l.y == doctest::Approx(-3.01));
  TorusPoint p = TorusPoint::from({-0.25, 3.5});
  CHECK(p.x == 0.75);
  CHECK(p.y == 0.5);
  CHECK(TorusPoint::from({-1e-18, 0}).x < 1.0);
  CHECK_THROWS_AS(Vec2::checked(std::nan(""), 0), Error);
}

TEST_CASE("target constants are rationally independent at desk scale") {
  CHECK(spot_check_rational_independence(RotationTarget::golden_silver()));
  CHECK_FALSE(spot_check_rational_independence(RotationTarget(0.5, 0.25)));
  CHECK_THROWS_AS(RotationTarget(0, 0), Error);
}

TEST_CASE("convex_hull examples") {
  auto a = convex_hull({Vec2{0, 0}});
  CHECK(a.size() == 1);
  CHECK(a.area() == 0.0);
  auto b = convex_hull({Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}, Vec2{0.2, 0.2}});
  CHECK(b.size() == 3);
  CHECK(b.area() == doctest::Approx(0.5));
  auto c = convex_hull({Vec2{0, 0}, Vec2{1, 1}, Vec2{0.5, 0.5}});
  CHECK(c.size() == 2);
  std::vector<Vec2> none;
  CHECK_THROWS_AS(convex_hull(none), Error);
}

TEST_CASE("convex_hull agrees with the brute-force oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 100; ++i) pts.push_back({u(rng), u(rng)});
    auto h = convex_hull(pts);
    auto edges = brute_force_edges(pts);
    REQUIRE(edges.size() == h.size());
    const auto& v = h.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
      Vec2 a = v[i], b = v[(i + 1) % v.size()];
      bool found = false;
      for (auto& e : edges) found = found || (e.first == a && e.second == b);
      CHECK(found);
    }
    // containment and idempotence
    for (Vec2 p : pts) CHECK(h.distance(p) <= 1e-12);
    auto again = convex_hull(h.vertices());
    CHECK(again.vertices() == h.vertices());
  }
}

TEST_CASE("polygon margins and Hausdorff distance") {
  auto sq = convex_hull({Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}});
  CHECK(sq.signed_margin({0.5, 0.25}) == doctest::Approx(0.25));
  CHECK(sq.signed_margin({1.5, 0.5}) == doctest::Approx(-0.5));
  CHECK(sq.support({1, 1}) == doctest::Approx(2.0));
  auto seg = convex_hull({Vec2{0, 0}, Vec2{1, 0}});
  CHECK(seg.signed_margin({0.5, 0}) <= 0.0);
  auto pt = convex_hull({Vec2{0.5, 2}});
  CHECK(hausdorff_distance(seg, pt) == doctest::Approx(std::hypot(0.5, 2.0)));
  CHECK(hausdorff_distance(sq, sq.translated({0.1, 0})) == doctest::Approx(0.1));
}

TEST_CASE("segment distances") {
  CHECK(point_segment_distance({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1));
  CHECK(segment_segment_distance({0, 0}, {1, 0}, {0, 0.5}, {1, 0.5}) == doctest::Approx(0.5));
  CHECK(segments_intersect({0, 0}, {1, 1}, {0, 1}, {1, 0}));
  CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 0.1}, {1, 0.1}));
  std::vector<Vec2> a{{0, 0}, {1, 0}, {1, 1}};
  CHECK(polyline_length(a) == doctest::Approx(2));
  CHECK(point_polyline_distance({2, 0.5}, a) == doctest::Approx(1));
}
