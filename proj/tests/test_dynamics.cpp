#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "rotlab/config.hpp"
#include "rotlab/dynamics.hpp"
#include "rotlab/error.hpp"

using namespace rotlab;
using namespace rotlab::dynamics;
using geometry::Vec2;

namespace {

// z + (alpha, beta) + 0.1 x: not a lift of a torus map
class BrokenMap final : public LiftedMap {
 public:
  Vec2 forward(Vec2 z) const override { return z + Vec2{0.3, 0.2} + Vec2{0.1 * z.x, 0.0}; }
  Vec2 inverse(Vec2 z) const override { return {(z.x - 0.3) / 1.1, z.y - 0.2}; }
  double displacement_bound() const override { return 1.0; }
  std::string family() const override { return "broken"; }
};

std::vector<MapPtr> shipped_maps() {
  auto t = geometry::RotationTarget::golden_silver();
  return {std::make_shared<RigidRotation>(t), std::make_shared<Translation>(Vec2{0.25, 0.5}),
          std::make_shared<DoubleShear>(0.1, 0.2, 0.15, 0.1), std::make_shared<ModulatedTranslation>(t, 0.1),
          std::make_shared<SlowedFlowMap>(SlowedFlowParams{})};
}

// normalization oracle: 8 copies of the triangle 0 <= y <= x <= 1/2 in polar
// coordinates, tanh-sinh in both variables. The radial factor is pulled out of
// the bracket so the integrand stays finite as r -> 0.
double normalization_oracle(double gamma) {
  boost::math::quadrature::tanh_sinh<double> q;
  auto outer = [&](double th) {
    double rmax = 0.5 / std::cos(th);
    auto inner = [&](double r) {
      if (r <= 0.0) return 0.0;
      double c = std::cos(th), sn = std::sin(th);
      double s = std::sin(std::numbers::pi * r * c) / r, t = std::sin(std::numbers::pi * r * sn) / r;
      return std::pow((s * s + t * t) / 2.0, -gamma / 2.0) * std::pow(r, 1.0 - gamma);
    };
    return q.integrate(inner, 0.0, rmax);
  };
  return 8.0 * q.integrate(outer, 0.0, std::numbers::pi / 4);
}

}  // namespace

TEST_CASE("evaluate examples") {
  auto t = geometry::RotationTarget::golden_silver();
  RigidRotation R(t);
  Vec2 w = evaluate(R, {0, 0});
  CHECK(w.x == t.alpha);
  CHECK(w.y == t.beta);
  CHECK(check_equivariance(R, 1000) < 1e-15);
}

TEST_CASE("shipped families are equivariant and invertible") {
  for (const auto& f : shipped_maps()) {
    CAPTURE(f->family());
    CHECK(check_equivariance(*f, 1000) < 1e-7);
    CHECK(check_inverse_consistency(*f, 1000) < 1e-6);
    CHECK(f->displacement_bound() >= sampled_displacement_sup(*f, 32));
  }
}

TEST_CASE("broken map fails the equivariance check") {
  BrokenMap b;
  CHECK(check_equivariance(b, 1000) > 0.05);
}

TEST_CASE("slowed flow with constant speed is the rigid rotation") {
  SlowedFlowParams p;
  p.slow_exponent = 0.0;
  SlowedFlowMap f(p);
  RigidRotation R(p.target);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    Vec2 z{u(rng), u(rng)};
    CHECK((f.forward(z) - R.forward(z)).norm() < 1e-6);
  }
}

TEST_CASE("slowed flow normalization matches an independent quadrature") {
  for (double g : {0.5, 1.0, 1.5}) {
    CAPTURE(g);
    CHECK(slowed_flow_normalization(g) == doctest::Approx(normalization_oracle(g)).epsilon(1e-7));
  }
  CHECK(slowed_flow_normalization(0.0) == doctest::Approx(1.0));
}

TEST_CASE("slowed flow fixes its slow center") {
  SlowedFlowParams p;
  p.slow_center = {0.3, 0.7};
  SlowedFlowMap f(p);
  Vec2 c = f.forward({0.3, 0.7});
  CHECK((c - Vec2{0.3, 0.7}).norm() < 1e-15);
  REQUIRE(f.known_fixed_points().size() == 1);
  CHECK(f.speed({0.3, 0.7}) == 0.0);
  CHECK(f.speed({0.8, 0.2}) > 0.0);
}

TEST_CASE("conjugated and shifted maps") {
  auto base = std::make_shared<DoubleShear>(0.1, 0.2, 0.15, 0.1);
  ConjugatedMap c(base, {1, 1, 0, 1});
  CHECK(check_equivariance(c, 500) < 1e-9);
  CHECK(check_inverse_consistency(c, 500) < 1e-9);
  Vec2 z{0.3, 0.4};
  Vec2 direct = c.apply_matrix(base->forward(c.apply_inverse_matrix(z)));
  CHECK((c.forward(z) - direct).norm() < 1e-15);
  CHECK_THROWS_AS(ConjugatedMap(base, {2, 0, 0, 1}), Error);
  ShiftedMap s(base, {1, -2});
  CHECK((s.forward(z) - base->forward(z) - Vec2{1, -2}).norm() == 0.0);
  CHECK((s.inverse(s.forward(z)) - z).norm() < 1e-12);
}

TEST_CASE("bump move carries the source to the destination") {
  BumpMove m({{0.2, 0.2}, {0.23, 0.24}}, 0.05);
  Vec2 g = m.apply({0.2, 0.2});
  CHECK((g - Vec2{0.23, 0.24}).norm() < 1e-15);
  CHECK((m.apply({3.2, -1.8}) - Vec2{3.23, -1.76}).norm() < 1e-14);  // translate
  CHECK(m.apply({0.5, 0.5}) == Vec2{0.5, 0.5});
  CHECK((m.apply_inverse({0.23, 0.24}) - Vec2{0.2, 0.2}).norm() < 1e-14);
  CHECK_THROWS_AS(BumpMove({{0, 0}, {0, 0}}, 0.1), Error);
  CHECK_THROWS_AS(BumpMove({{0, 0}, {0.1, 0}}, 0.3), Error);
}

TEST_CASE("bump sub-move fields are contractions") {
  BumpMove m({{0.4, 0.4}, {0.45, 0.42}, {0.47, 0.48}}, 0.03);
  const double r = m.radius(), h = r / 100;
  double worst = 0.0;
  for (int k = 0; k < m.submoves(); ++k)
    for (double x = 0.4 - r; x <= 0.47 + r; x += h)
      for (double y = 0.4 - r; y <= 0.48 + r; y += h) {
        Vec2 z{x, y};
        Vec2 d0 = m.submove_displacement(k, z);
        Vec2 dx = m.submove_displacement(k, z + Vec2{h, 0});
        Vec2 dy = m.submove_displacement(k, z + Vec2{0, h});
        worst = std::max({worst, (dx - d0).norm() / h, (dy - d0).norm() / h});
      }
  CHECK(worst < 1.0);
  CHECK(worst <= m.lipschitz_bound() + 1e-9);
}

TEST_CASE("composition with a perturbation") {
  auto f = std::make_shared<RigidRotation>(geometry::RotationTarget::golden_silver());
  auto same = compose_with_perturbation(f, CompositePerturbation{});
  CHECK((same->forward({0.1, 0.2}) - f->forward({0.1, 0.2})).norm() == 0.0);

  Vec2 d{0.02, -0.01};
  BumpMove m({{0.5, 0.5}, Vec2{0.5, 0.5} + d}, 0.05);
  auto g = compose_with_perturbation(f, CompositePerturbation({m}));
  // sup |g - f| over a grid of the support: at least |d| (attained at the source), at most the declared bound
  double sup = 0.0;
  for (double x = 0.4; x <= 0.6; x += 0.001)
    for (double y = 0.4; y <= 0.6; y += 0.001) {
      Vec2 w{x, y};
      Vec2 z = f->inverse(w);
      sup = std::max(sup, (g->forward(z) - f->forward(z)).norm());
    }
  Vec2 src = f->inverse({0.5, 0.5});
  sup = std::max(sup, (g->forward(src) - f->forward(src)).norm());
  CHECK(sup >= d.norm() - 1e-9);
  CHECK(sup <= CompositePerturbation({m}).c0_distance() + 1e-12);
  CHECK(check_inverse_consistency(*g, 1000) < 1e-9);
  CHECK(check_equivariance(*g, 1000) < 1e-9);
}

TEST_CASE("disjoint moves commute") {
  BumpMove a({{0.2, 0.2}, {0.22, 0.2}}, 0.04), b({{0.7, 0.6}, {0.7, 0.63}}, 0.05);
  CompositePerturbation ab({a, b}), ba({b, a});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Vec2 z{u(rng), u(rng)};
    worst = std::max(worst, (ab.apply(z) - ba.apply(z)).norm());
  }
  // points sampled inside the supports as well
  for (double s = 0; s <= 1; s += 0.01) {
    for (Vec2 z : {Vec2{0.2 + 0.02 * s, 0.2 + 0.01}, Vec2{0.7 + 0.01, 0.6 + 0.03 * s}})
      worst = std::max(worst, (ab.apply(z) - ba.apply(z)).norm());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("overlapping supports are rejected") {
  BumpMove a({{0.2, 0.2}, {0.25, 0.2}}, 0.04), b({{0.22, 0.25}, {0.27, 0.25}}, 0.04);
  CHECK_THROWS_AS(CompositePerturbation({a, b}), Error);
  auto pairs = overlapping_supports({a, b});
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
  // across the lattice
  BumpMove c({{0.98, 0.5}, {0.99, 0.5}}, 0.04), e({{0.01, 0.5}, {0.02, 0.5}}, 0.04);
  CHECK(overlapping_supports({c, e}).size() == 1);
}

TEST_CASE("map specs round-trip bit-identically") {
  for (const auto& f : shipped_maps()) {
    CAPTURE(f->family());
    auto text = config::map_spec_text(f->spec());
    auto g = make_map(config::parse_map_spec_text(text));
    for (Vec2 z : {Vec2{0.1, 0.2}, Vec2{0.77, 0.31}}) CHECK(g->forward(z) == f->forward(z));
  }
  CHECK_THROWS_AS(make_map({"nope", {}}), Error);
  CHECK_THROWS_AS(make_map({"translation", {{"dz", "1"}}}), Error);
}
