#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rotlab/geometry.hpp"

namespace rotlab::dynamics {

using geometry::RotationTarget;
using geometry::TorusPoint;
using geometry::Vec2;

// family name plus string-valued parameters; doubles are written with 17
// significant digits so a map rebuilt from its spec is bit-identical.
struct MapSpec {
  std::string family;
  std::map<std::string, std::string> params;
};

class LiftedMap {
 public:
  virtual ~LiftedMap() = default;
  virtual Vec2 forward(Vec2 z) const = 0;
  virtual Vec2 inverse(Vec2 z) const = 0;
  // houses C_f: an upper bound for |f(z) - z|
  virtual double displacement_bound() const = 0;
  virtual std::string family() const = 0;
  // Points of the torus known to be fixed by the projected map.
  virtual std::vector<Vec2> known_fixed_points() const { return {}; }
  // False for test-only maps that cannot be rebuilt from text.
  virtual bool has_spec() const { return false; }
  virtual MapSpec spec() const;
};

using MapPtr = std::shared_ptr<const LiftedMap>;

// forward image with a finiteness check
Vec2 evaluate(const LiftedMap& f, Vec2 z);
Vec2 evaluate_inverse(const LiftedMap& f, Vec2 z);

// Orbit bookkeeping in reduced form: the lift is offset + pos with pos in
// [0,1)^2 and offset integer-valued. Stepping evaluates the map at pos only,
// using equivariance, so floating-point error does not grow with |lift|.
struct OrbitState {
  Vec2 offset;
  Vec2 pos;

  static OrbitState at(Vec2 lift);
  Vec2 lift() const { return offset + pos; }
  TorusPoint torus() const { return {pos.x, pos.y}; }
};

// Advances s in place; returns the lift displacement of this step.
Vec2 step(const LiftedMap& f, OrbitState& s);

// max over random z in [-3,3]^2 and m in {-2..2}^2 of |f(z+m) - f(z) - m|
double check_equivariance(const LiftedMap& f, int samples, std::uint64_t seed = 7);
// max |f^-1(f(z)) - z| over random z in [0,1)^2
double check_inverse_consistency(const LiftedMap& f, int samples, std::uint64_t seed = 11);
// max |f(z) - z| over a grid x grid sampling of [0,1)^2
double sampled_displacement_sup(const LiftedMap& f, int grid);

class Translation final : public LiftedMap {
 public:
  explicit Translation(Vec2 d);
  Vec2 forward(Vec2 z) const override { return z + d_; }
  Vec2 inverse(Vec2 z) const override { return z - d_; }
  double displacement_bound() const override { return d_.norm(); }
  std::string family() const override { return "translation"; }
  std::vector<Vec2> known_fixed_points() const override;
  bool has_spec() const override { return true; }
  MapSpec spec() const override;
  Vec2 vector() const { return d_; }

 private:
  Vec2 d_;
};

// R_(a,b)
class RigidRotation final : public LiftedMap {
 public:
  explicit RigidRotation(RotationTarget t) : t_(t) {}
  Vec2 forward(Vec2 z) const override { return z + t_.vec(); }
  Vec2 inverse(Vec2 z) const override { return z - t_.vec(); }
  double displacement_bound() const override { return t_.vec().norm(); }
  std::string family() const override { return "rigid_rotation"; }
  bool has_spec() const override { return true; }
  MapSpec spec() const override;
  const RotationTarget& target() const { return t_; }

 private:
  RotationTarget t_;
};

// x1 = x + a + c1 sin(2 pi y),  y1 = y + b + c2 sin(2 pi x1)
class DoubleShear final : public LiftedMap {
 public:
  DoubleShear(double a, double b, double c1, double c2);
  Vec2 forward(Vec2 z) const override;
  Vec2 inverse(Vec2 z) const override;
  double displacement_bound() const override;
  std::string family() const override { return "double_shear"; }
  std::vector<Vec2> known_fixed_points() const override;
  bool has_spec() const override { return true; }
  MapSpec spec() const override;

 private:
  double a_, b_, c1_, c2_;
};

// z + (1 + amp sin(2 pi y)) (a, b)
class ModulatedTranslation final : public LiftedMap {
 public:
  ModulatedTranslation(RotationTarget t, double amp);
  Vec2 forward(Vec2 z) const override;
  Vec2 inverse(Vec2 z) const override;
  double displacement_bound() const override;
  std::string family() const override { return "modulated_translation"; }
  bool has_spec() const override { return true; }
  MapSpec spec() const override;

 private:
  RotationTarget t_;
  double amp_;
};

struct SlowedFlowParams {
  RotationTarget target = RotationTarget::golden_silver();
  Vec2 slow_center{0.0, 0.0};
  // speed = kappa * ((sin^2 pi u + sin^2 pi v)/2)^(exponent/2), (u,v) = z - center;
  // kappa normalizes the harmonic mean of the speed to 1. exponent = 0 gives
  // constant speed 1.
  double slow_exponent = 1.0;
  double integrator_step = 0.05;
};

// Time-1 map of dz/dt = s(z) (a, b).
class SlowedFlowMap final : public LiftedMap {
 public:
  explicit SlowedFlowMap(SlowedFlowParams p);
  Vec2 forward(Vec2 z) const override;
  Vec2 inverse(Vec2 z) const override;
  double displacement_bound() const override;
  std::string family() const override { return "slowed_flow"; }
  std::vector<Vec2> known_fixed_points() const override;
  bool has_spec() const override { return true; }
  MapSpec spec() const override;

  const SlowedFlowParams& params() const { return p_; }
  double kappa() const { return kappa_; }
  double speed(Vec2 z) const;
  // flow parameter tau with forward(z) = z + tau (a,b) for time T from z
  double flow_parameter(Vec2 z, double T) const;

 private:
  SlowedFlowParams p_;
  double kappa_;
  int steps_;
};

// int over [-1/2,1/2]^2 of ((sin^2 pi x + sin^2 pi y)/2)^(-exponent/2)
double slowed_flow_normalization(double exponent);

// T f T^-1 for T in GL(2,Z), stored row-major
class ConjugatedMap final : public LiftedMap {
 public:
  ConjugatedMap(MapPtr base, std::array<int, 4> T);
  Vec2 forward(Vec2 z) const override;
  Vec2 inverse(Vec2 z) const override;
  double displacement_bound() const override;
  std::string family() const override { return "conjugated"; }
  std::vector<Vec2> known_fixed_points() const override;
  Vec2 apply_matrix(Vec2 v) const;
  Vec2 apply_inverse_matrix(Vec2 v) const;

 private:
  MapPtr base_;
  std::array<int, 4> T_;
  std::array<int, 4> Tinv_;
};

// f + m for an integer vector m
class ShiftedMap final : public LiftedMap {
 public:
  ShiftedMap(MapPtr base, Vec2 m);
  Vec2 forward(Vec2 z) const override { return base_->forward(z) + m_; }
  Vec2 inverse(Vec2 z) const override { return base_->inverse(z - m_); }
  double displacement_bound() const override { return base_->displacement_bound() + m_.norm(); }
  std::string family() const override { return "shifted"; }

 private:
  MapPtr base_;
  Vec2 m_;
};

// Eta(t) = 1 - 3t^2 + 2t^3 on [0,1], 0 beyond. C^1, |Eta'| <= 1.5.
double bump_profile(double t);
inline constexpr double kBumpSlope = 1.5;
// sub-move length as a fraction of the support radius
inline constexpr double kSubmoveFraction = 0.4;

// A homeomorphism supported in the radius-r tube around a polyline path,
// carrying path.front() (the source) to path.back() (the destination) through
// sub-moves z -> z + Eta(dist(z, path)/r) (n_{k+1} - n_k) along nodes n_k of
// the path. Replicated over all integer translates.
class BumpMove {
 public:
  BumpMove() = default;
  BumpMove(std::vector<Vec2> path, double radius, int submoves = 0);

  const std::vector<Vec2>& path() const { return path_; }
  double radius() const { return radius_; }
  Vec2 source() const { return path_.front(); }
  Vec2 destination() const { return path_.back(); }
  int submoves() const { return static_cast<int>(nodes_.size()) - 1; }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  double length() const;
  // Lipschitz bound of each sub-move displacement field
  double lipschitz_bound() const;

  // Translate m with w - m within the support, if any.
  bool locate(Vec2 w, Vec2& m) const;
  bool in_support(Vec2 w) const { Vec2 m; return locate(w, m); }
  Vec2 apply(Vec2 w) const;
  Vec2 apply_inverse(Vec2 w) const;
  // the k-th sub-move displacement at a point of the anchored copy
  Vec2 submove_displacement(int k, Vec2 z) const;
  Vec2 box_lo() const { return lo_; }
  Vec2 box_hi() const { return hi_; }

 private:
  std::vector<Vec2> path_;
  double radius_ = 0.0;
  std::vector<Vec2> nodes_;
  Vec2 lo_, hi_;
};

// minimum over integer translates of the distance between the two paths
double torus_path_distance(const BumpMove& a, const BumpMove& b);
// index pairs (i < j) of moves whose supports overlap
std::vector<std::pair<std::size_t, std::size_t>> overlapping_supports(const std::vector<BumpMove>& moves);

class CompositePerturbation {
 public:
  CompositePerturbation() = default;
  // Throws Closing if supports overlap (path distance <= sum of radii) or a
  // support meets its own translates.
  explicit CompositePerturbation(std::vector<BumpMove> moves);

  const std::vector<BumpMove>& moves() const { return moves_; }
  double c0_distance() const { return c0_; }
  bool empty() const { return moves_.empty(); }

  Vec2 apply(Vec2 w) const;
  Vec2 apply_inverse(Vec2 w) const;
  // index of the move whose support contains w, or -1
  int support_of(Vec2 w) const;

 private:
  void build_index();
  std::vector<int> candidates(Vec2 w) const;
  std::vector<BumpMove> moves_;
  double c0_ = 0.0;
  int cells_ = 16;
  std::vector<std::vector<int>> buckets_;
};

class PerturbedMap final : public LiftedMap {
 public:
  PerturbedMap(MapPtr base, CompositePerturbation pert);
  Vec2 forward(Vec2 z) const override;
  Vec2 inverse(Vec2 z) const override;
  double displacement_bound() const override;
  std::string family() const override { return "perturbed"; }
  std::vector<Vec2> known_fixed_points() const override;
  const MapPtr& base() const { return base_; }
  const CompositePerturbation& perturbation() const { return pert_; }

 private:
  MapPtr base_;
  CompositePerturbation pert_;
};

MapPtr compose_with_perturbation(MapPtr f, CompositePerturbation pert);

MapPtr make_map(const MapSpec& spec);
std::string format_real(double v);

}  // namespace rotlab::dynamics
