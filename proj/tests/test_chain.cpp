#include <doctest.h>

#include <cmath>
#include <random>

#include "rotlab/chain.hpp"
#include "rotlab/error.hpp"

using namespace rotlab;
using namespace rotlab::chain;

namespace {

const auto kT = RotationTarget::golden_silver();

void check_ledger(const ChainState& c) {
  CHECK(std::abs(c.ledger_perp() - c.total_perp()) < 1e-9);
  CHECK(std::abs(c.ledger_par() - c.total_par()) < 1e-9);
  double drift = 0.0;
  for (const auto& s : c.segments) drift += s.perp_drift;
  CHECK(std::abs(drift - c.cumulative_perp_drift) < 1e-12);
}

}  // namespace

TEST_CASE("scripted chains satisfy the ledger identity") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<long> len(1, 400);
  std::uniform_int_distribution<int> nseg(1, 6);
  dynamics::DoubleShear f(0.1, 0.2, 0.15, 0.1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<SegmentRequest> req;
    int S = nseg(rng);
    for (int k = 0; k < S; ++k) req.push_back({TorusPoint::from({u(rng), u(rng)}), len(rng), k == S - 1});
    auto mode = trial % 2 ? RegionMode::Origin : RegionMode::Segment;
    auto c = assemble_chain(f, kT, req, 0.1, mode);
    CAPTURE(trial);
    REQUIRE(c.segments.size() == req.size());
    REQUIRE(c.junctions.size() == req.size());
    check_ledger(c);
    long period = 0;
    for (const auto& s : c.segments) period += s.length();
    CHECK(c.period == period);
  }
}

TEST_CASE("scripted rational translation closes with the expected label") {
  // orbit of a translation by a rational Omega0 vector: one segment, exact return
  auto cs = pseudo_orbit::shortest_drift_candidates(kT, 0.02, RegionLabel::Omega0, 10'000, 2e-3, 1);
  REQUIRE(cs.size() == 1);
  const auto& d = cs[0];
  dynamics::Translation f(d.lift_displacement / static_cast<double>(d.period));
  auto c = assemble_chain(f, kT, {{TorusPoint::from({0.3, 0.6}), d.period, true}}, 0.05);
  CHECK(c.closed);
  CHECK(c.lift_displacement == d.lift_displacement);
  CHECK(c.label == RegionLabel::Omega0);
  CHECK(geometry::classify_region(kT, c.candidate_vector()) == RegionLabel::Omega0);
  check_ledger(c);
  auto o = to_pseudo_orbit(f, c);
  CHECK(o.period() == static_cast<std::size_t>(d.period));
  CHECK(pseudo_orbit::check_gaps(f, o).ok);
}

TEST_CASE("rigid rotation fails at the large-deviation stage") {
  dynamics::RigidRotation R(kT);
  ChainOptions o;
  o.budgets.rk_budget = 200'000;
  try {
    chain_segments(R, kT, 0.1, o);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SearchExhausted);
    CHECK(e.stage() == "large-deviation");
  }
}

TEST_CASE("ladder on a translation produces an Omega0 loop") {
  dynamics::Translation f({0.63039466852489279, 0.42249783362055704});
  ChainOptions o;
  o.strategy = ChainStrategy::LadderOnly;
  auto r = chain_segments(f, kT, 0.1, o);
  CHECK(r.used == ChainCase::Ladder);
  REQUIRE_FALSE(r.chains.empty());
  const auto& c = r.chains.front();
  CHECK(c.closed);
  CHECK(c.label == RegionLabel::Omega0);
  CHECK(geometry::classify_region(kT, c.candidate_vector()) == RegionLabel::Omega0);
  for (const auto& j : c.junctions) CHECK(j.gap < 0.1);
  check_ledger(c);
  CHECK(pseudo_orbit::check_gaps(f, to_pseudo_orbit(f, c)).ok);
}

TEST_CASE("slowed flow chain labels") {
  dynamics::SlowedFlowMap S(dynamics::SlowedFlowParams{});
  auto r = chain_segments(S, kT, 0.05);
  REQUIRE_FALSE(r.chains.empty());
  for (const auto& c : r.chains) {
    CHECK(c.closed);
    auto lab = geometry::classify_region(kT, c.candidate_vector());
    CHECK((lab == RegionLabel::Delta0 || lab == RegionLabel::Omega0));
    CHECK(lab == c.label);
    check_ledger(c);
  }
  CHECK(goal_labels(RegionMode::Origin) == std::pair{RegionLabel::D0, RegionLabel::D1});
}
