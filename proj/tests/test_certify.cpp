#include <doctest.h>

#include <cmath>
#include <memory>

#include "rotlab/certify.hpp"
#include "rotlab/error.hpp"

using namespace rotlab;
using namespace rotlab::certify;

namespace {

const auto kT = geometry::RotationTarget::golden_silver();

}  // namespace

TEST_CASE("curve validation") {
  CHECK_NOTHROW(straight_curve({0, 1}).validate());
  CHECK_NOTHROW(straight_curve({-2, 3}, {0.1, 0.2}, 5).validate());
  CHECK_NOTHROW(sinusoid_curve({1, 1}, {0, 0}, 0.1).validate());
  CHECK_THROWS_AS(straight_curve({2, 0}), Error);
  CHECK_THROWS_AS(straight_curve({0.5, 1}), Error);
  PeriodicCurve bad{{1, 0}, {{0, 0}, {0.5, 0.2}, {1, 0.1}}};
  CHECK_THROWS_AS(bad.validate(), Error);  // offset is not (1,0)
  // a zig-zag that crosses its own translate
  PeriodicCurve loop{{1, 0}, {{0, 0}, {1.5, 0.1}, {0.6, -0.1}, {1, 0}}};
  CHECK_THROWS_AS(loop.validate(), Error);
}

TEST_CASE("side of a curve") {
  auto c = straight_curve({0, 1});
  CHECK(side_of(c, {-0.5, 0.3}) == 1);
  CHECK(side_of(c, {0.5, 17.3}) == -1);
  CHECK(side_of(c, {0.0, -4.2}) == 0);
  CHECK(side_of(c, {1e-12, 0.0}) == 0);
  CHECK(distance_to_curve(c, {0.25, 9.0}) == doctest::Approx(0.25));
  auto s = sinusoid_curve({1, 0}, {0, 0}, 0.2);
  CHECK(side_of(s, {0.25, 0.3}) == 1);
  CHECK(side_of(s, {0.25, 0.1}) == -1);
  CHECK(side_of(s, {3.75, -0.1}) == 1);
}

TEST_CASE("translation against a vertical line") {
  dynamics::Translation f({0.3, 0.1});
  auto cert = certify_brouwer_line(f, straight_curve({0, 1}));
  CHECK(cert.verdict);
  CHECK(std::abs(cert.min_forward_clearance - 0.3) < 1e-9);
  CHECK(std::abs(cert.min_backward_clearance - 0.3) < 1e-9);
  CHECK(cert.forward_side == -1);
  CHECK(cert.backward_side == 1);
  CHECK(cert.forward_normal().x == doctest::Approx(1.0));

  dynamics::Translation g({0.0, 0.1});
  auto bad = certify_brouwer_line(g, straight_curve({0, 1}));
  CHECK_FALSE(bad.verdict);
  CHECK(bad.ambiguous > 0);
  CHECK_FALSE(bad.diagnostic.empty());
}

TEST_CASE("rigid rotation against a line perpendicular to the rotation vector") {
  dynamics::RigidRotation R(kT);
  // (-2,3) is close to perpendicular to (alpha, beta)
  Vec2 d{-2, 3};
  auto cert = certify_brouwer_line(R, straight_curve(d, {0.1, 0.05}, 4));
  REQUIRE(cert.verdict);
  Vec2 n = Vec2{-d.y, d.x} / d.norm();
  double predicted = std::abs(geometry::dot(kT.vec(), n));
  CHECK(std::abs(cert.clearance() - predicted) < 1e-9);
  CHECK(cert.forward_side == -cert.backward_side);
}

TEST_CASE("certificates are translation equivariant") {
  dynamics::DoubleShear f(0.05, 0.3, 0.02, 0.0);
  auto c = sinusoid_curve({0, 1}, {0.1, 0.0}, 0.05, 32);
  auto a = certify_brouwer_line(f, c);
  for (Vec2 m : {Vec2{1, 0}, Vec2{-2, 3}}) {
    auto b = certify_brouwer_line(f, c.translated(m));
    CHECK(a.verdict == b.verdict);
    CHECK(a.forward_side == b.forward_side);
    CHECK(a.min_forward_clearance == doctest::Approx(b.min_forward_clearance).epsilon(1e-9));
    CHECK(a.min_backward_clearance == doctest::Approx(b.min_backward_clearance).epsilon(1e-9));
  }
}

TEST_CASE("certificates persist under perturbations below the clearance") {
  auto f = std::make_shared<dynamics::Translation>(Vec2{0.3, 0.1});
  auto curve = straight_curve({0, 1});
  auto a = certify_brouwer_line(*f, curve);
  REQUIRE(a.verdict);
  double c = a.clearance();
  for (double frac : {0.25, 0.5, 0.9}) {
    dynamics::BumpMove m({{0.5, 0.5}, {0.5 - frac * c, 0.5}}, 0.2);
    auto g = dynamics::compose_with_perturbation(f, dynamics::CompositePerturbation({m}));
    auto b = certify_brouwer_line(*g, curve);
    CAPTURE(frac);
    CHECK(b.verdict);
    CHECK(b.forward_side == a.forward_side);
  }
}

TEST_CASE("cone confinement") {
  dynamics::RigidRotation R(kT);
  std::vector<BrouwerCertificate> certs{certify_brouwer_line(R, straight_curve({0, 1})),
                                        certify_brouwer_line(R, straight_curve({1, 0}))};
  auto hull = geometry::convex_hull({kT.vec()});
  auto rep = cone_confinement_check(certs, hull);
  CHECK(rep.confined());
  CHECK(rep.epsilon0 == doctest::Approx(std::min(kT.alpha, kT.beta)).epsilon(1e-9));
  REQUIRE(rep.min_projection.size() == 2);
  CHECK(rep.min_projection[0] == doctest::Approx(kT.alpha));

  auto fake = geometry::convex_hull({kT.vec(), Vec2{-0.2, 0.3}});
  auto v = cone_confinement_check(certs, fake);
  REQUIRE(v.violations.size() == 1);
  CHECK(v.violations[0].curve == 0);
  CHECK(v.violations[0].vertex == Vec2{-0.2, 0.3});
  CHECK(v.violations[0].value == doctest::Approx(-0.2));

  dynamics::Translation g({0.0, 0.1});
  certs.push_back(certify_brouwer_line(g, straight_curve({0, 1})));
  CHECK_THROWS_AS(cone_confinement_check(certs, hull), Error);
}
