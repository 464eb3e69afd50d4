#include <doctest.h>

#include <cmath>
#include <memory>

#include "rotlab/closing.hpp"
#include "rotlab/error.hpp"
#include "rotlab/rotation.hpp"

using namespace rotlab;
using namespace rotlab::closing;
using geometry::TorusPoint;
using pseudo_orbit::make_pseudo_orbit;

namespace {

const auto kT = geometry::RotationTarget::golden_silver();

// lift of g^n starting from the lift x
Vec2 iterate(const dynamics::LiftedMap& g, Vec2 x, long n) {
  dynamics::OrbitState s = dynamics::OrbitState::at(x);
  for (long i = 0; i < n; ++i) dynamics::step(g, s);
  return s.lift();
}

// four points of the orbit of a quarter-turn translation, started at p
PseudoPeriodicOrbit quarter_orbit(const dynamics::LiftedMap& f, Vec2 p, double eps) {
  std::vector<TorusPoint> pts;
  for (int i = 0; i < 4; ++i) pts.push_back(TorusPoint::from(p + i * Vec2{0.25, 0.25}));
  return make_pseudo_orbit(f, pts, eps);
}

}  // namespace

TEST_CASE("a period-one orbit closes with one short move") {
  auto f = std::make_shared<dynamics::Translation>(Vec2{0.004, -0.003});
  auto o = make_pseudo_orbit(*f, {TorusPoint::from({0.4, 0.4})}, 0.05);
  auto plan = plan_closing(*f, {o}, 0.05);
  REQUIRE(plan.moves.size() == 1);
  CHECK(plan.moves[0].length() == doctest::Approx(0.005));
  CHECK(plan.moves[0].radius() <= 0.05 / 4);
  auto sys = execute_closing(f, plan);
  CHECK((sys.map->forward({0.4, 0.4}) - Vec2{0.4, 0.4}).norm() < 1e-12);
  REQUIRE(sys.periodic_orbits.size() == 1);
  CHECK(sys.periodic_orbits[0].period == 1);
  CHECK(sys.periodic_orbits[0].rational_vector == Vec2{0, 0});
}

TEST_CASE("two lattice orbits close with disjoint supports") {
  auto f = std::make_shared<dynamics::Translation>(Vec2{0.251, 0.2495});
  double eps = 0.05;
  auto a = quarter_orbit(*f, {0.1, 0.1}, eps), b = quarter_orbit(*f, {0.1, 0.6}, eps);
  auto plan = plan_closing(*f, {a, b}, eps);
  CHECK(plan.moves.size() == 8);
  CHECK(plan.min_clearance > 0.0);
  CHECK(dynamics::overlapping_supports(plan.moves).empty());
  CHECK(plan.total_c0 < eps);
  for (const auto& m : plan.moves) {
    CHECK(m.radius() <= eps / 4);
    CHECK(m.length() < eps);
  }
  auto sys = execute_closing(f, plan);
  for (const auto& o : sys.periodic_orbits) {
    Vec2 x = o.points[0].vec();
    CHECK((iterate(*sys.map, x, 4) - x - Vec2{1, 1}).norm() < 1e-9);
    CHECK(o.rational_vector == Vec2{0.25, 0.25});
  }
  auto rep = verify_closed_system(sys, *f);
  CHECK(rep.max_closure_error < 1e-9);
  CHECK(rep.c0_distance < eps);
  CHECK(rep.locality_error < 1e-12);
  CHECK(rep.inverse_error < 1e-6);
}

TEST_CASE("orbits sharing a point are rejected") {
  auto f = std::make_shared<dynamics::Translation>(Vec2{0.251, 0.2495});
  auto a = quarter_orbit(*f, {0.1, 0.1}, 0.05);
  try {
    plan_closing(*f, {a, a}, 0.05);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Closing);
  }
  // gap at least eps
  auto wide = quarter_orbit(*f, {0.1, 0.1}, 0.5);
  CHECK_THROWS_AS(plan_closing(*f, {wide}, 0.001), Error);
}

TEST_CASE("closing a detected pseudo-orbit of the rigid rotation") {
  auto R = std::make_shared<dynamics::RigidRotation>(kT);
  Vec2 x0{0.2, 0.3};
  auto o = pseudo_orbit::detect_pseudo_periodic(*R, TorusPoint::from(x0), 0.02, 1'000'000);
  const long n = static_cast<long>(o.period());
  auto sys = execute_closing(R, plan_closing(*R, {o}, 0.02));
  CHECK((iterate(*sys.map, x0, n) - x0 - o.lift_displacement).norm() < 1e-9);
  Vec2 rho = rotation::orbit_rotation_vector(*sys.map, x0, 10 * n);
  CHECK((rho - o.lift_displacement / static_cast<double>(n)).norm() < 1e-9);

  auto rep = verify_closed_system(sys, *R);
  CHECK(rep.max_closure_error < 1e-9);
  CHECK(rep.c0_distance < 0.02);
  CHECK(rep.c0_distance <= rep.declared_c0 + 1e-12);
  CHECK(rep.locality_error < 1e-12);
}

TEST_CASE("empty plan leaves the map unchanged") {
  auto R = std::make_shared<dynamics::RigidRotation>(kT);
  auto sys = execute_closing(R, plan_closing(*R, {}, 0.05));
  CHECK(sys.perturbation.empty());
  for (Vec2 z : {Vec2{0.1, 0.2}, Vec2{0.9, 0.4}}) CHECK(sys.map->forward(z) == R->forward(z));
}

TEST_CASE("deleting a move breaks closure") {
  auto f = std::make_shared<dynamics::Translation>(Vec2{0.251, 0.2495});
  auto a = quarter_orbit(*f, {0.1, 0.1}, 0.05);
  auto sys = execute_closing(f, plan_closing(*f, {a}, 0.05));
  auto moves = sys.perturbation.moves();
  REQUIRE(moves.size() == 4);
  double gap = moves[2].length();
  moves.erase(moves.begin() + 2);
  auto tampered = make_closed_system(f, dynamics::CompositePerturbation(moves), sys.periodic_orbits, sys.epsilon);
  auto rep = verify_closed_system(tampered, *f);
  CHECK(rep.max_closure_error > gap / 2);
}

TEST_CASE("fixed points outside the supports are preserved") {
  dynamics::SlowedFlowParams p;
  auto S = std::make_shared<dynamics::SlowedFlowMap>(p);
  Vec2 x0{0.5, 0.5};
  auto o = pseudo_orbit::detect_pseudo_periodic(*S, TorusPoint::from(x0), 0.05, 1'000'000);
  auto sys = execute_closing(S, plan_closing(*S, {o}, 0.05));
  Vec2 c = p.slow_center;
  CHECK(sys.perturbation.support_of(c) == -1);
  CHECK(sys.map->forward(c) == S->forward(c));
  CHECK((sys.map->forward(c) - c).norm() < 1e-15);
  auto rep = verify_closed_system(sys, *S);
  CHECK(rep.fixed_point_error < 1e-12);
  CHECK(rep.max_closure_error < 1e-9);
}
