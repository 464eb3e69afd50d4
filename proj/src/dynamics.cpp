#include "rotlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "rotlab/error.hpp"

namespace rotlab::dynamics {

using geometry::reduce_unit;

MapSpec LiftedMap::spec() const {
  throw Error(ErrorKind::InvalidArgument, "dynamics", "map family '" + family() + "' has no text form");
}

Vec2 evaluate(const LiftedMap& f, Vec2 z) {
  Vec2 w = f.forward(z);
  if (!w.finite()) throw Error(ErrorKind::Integrator, "dynamics", "non-finite forward image");
  return w;
}

Vec2 evaluate_inverse(const LiftedMap& f, Vec2 z) {
  Vec2 w = f.inverse(z);
  if (!w.finite()) throw Error(ErrorKind::Integrator, "dynamics", "non-finite inverse image");
  return w;
}

OrbitState OrbitState::at(Vec2 lift) {
  OrbitState s;
  s.offset = geometry::floor(lift);
  s.pos = lift - s.offset;
  if (s.pos.x >= 1.0) { s.pos.x = 0.0; s.offset.x += 1.0; }
  if (s.pos.y >= 1.0) { s.pos.y = 0.0; s.offset.y += 1.0; }
  return s;
}

Vec2 step(const LiftedMap& f, OrbitState& s) {
  Vec2 w = f.forward(s.pos);
  if (!w.finite()) throw Error(ErrorKind::Integrator, "dynamics", "non-finite forward image");
  Vec2 d = w - s.pos;
  Vec2 fl = geometry::floor(w);
  Vec2 p = w - fl;
  if (p.x >= 1.0) { p.x = 0.0; fl.x += 1.0; }
  if (p.y >= 1.0) { p.y = 0.0; fl.y += 1.0; }
  s.offset += fl;
  s.pos = p;
  return d;
}

double check_equivariance(const LiftedMap& f, int samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "dynamics", "samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> m(-2, 2);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vec2 z{u(rng), u(rng)};
    Vec2 k{static_cast<double>(m(rng)), static_cast<double>(m(rng))};
    Vec2 e = evaluate(f, z + k) - evaluate(f, z) - k;
    worst = std::max(worst, e.norm());
  }
  return worst;
}

double check_inverse_consistency(const LiftedMap& f, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vec2 z{u(rng), u(rng)};
    worst = std::max(worst, (evaluate_inverse(f, evaluate(f, z)) - z).norm());
  }
  return worst;
}

double sampled_displacement_sup(const LiftedMap& f, int grid) {
  double s = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      Vec2 z{(i + 0.5) / grid, (j + 0.5) / grid};
      s = std::max(s, (evaluate(f, z) - z).norm());
    }
  return s;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Translation::Translation(Vec2 d) : d_(Vec2::checked(d.x, d.y)) {}

std::vector<Vec2> Translation::known_fixed_points() const {
  if (d_.x == std::nearbyint(d_.x) && d_.y == std::nearbyint(d_.y)) return {{0.0, 0.0}};
  return {};
}

MapSpec Translation::spec() const {
  return {"translation", {{"dx", format_real(d_.x)}, {"dy", format_real(d_.y)}}};
}

MapSpec RigidRotation::spec() const {
  return {"rigid_rotation", {{"alpha", format_real(t_.alpha)}, {"beta", format_real(t_.beta)}}};
}

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

DoubleShear::DoubleShear(double a, double b, double c1, double c2) : a_(a), b_(b), c1_(c1), c2_(c2) {
  for (double v : {a, b, c1, c2})
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "dynamics", "non-finite shear parameter");
}

Vec2 DoubleShear::forward(Vec2 z) const {
  double x1 = z.x + a_ + c1_ * std::sin(kTwoPi * z.y);
  double y1 = z.y + b_ + c2_ * std::sin(kTwoPi * x1);
  return {x1, y1};
}

Vec2 DoubleShear::inverse(Vec2 z) const {
  double y = z.y - b_ - c2_ * std::sin(kTwoPi * z.x);
  double x = z.x - a_ - c1_ * std::sin(kTwoPi * y);
  return {x, y};
}

double DoubleShear::displacement_bound() const {
  return std::hypot(std::abs(a_) + std::abs(c1_), std::abs(b_) + std::abs(c2_));
}

std::vector<Vec2> DoubleShear::known_fixed_points() const {
  if (a_ != std::nearbyint(a_) || b_ != std::nearbyint(b_)) return {};
  return {{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}};
}

MapSpec DoubleShear::spec() const {
  return {"double_shear",
          {{"a", format_real(a_)}, {"b", format_real(b_)}, {"c1", format_real(c1_)}, {"c2", format_real(c2_)}}};
}

ModulatedTranslation::ModulatedTranslation(RotationTarget t, double amp) : t_(t), amp_(amp) {
  if (!std::isfinite(amp) || kTwoPi * std::abs(amp * t.beta) >= 1.0)
    throw Error(ErrorKind::InvalidArgument, "dynamics",
                "modulation amplitude too large for an invertible map");
}

Vec2 ModulatedTranslation::forward(Vec2 z) const {
  double s = 1.0 + amp_ * std::sin(kTwoPi * z.y);
  return {z.x + s * t_.alpha, z.y + s * t_.beta};
}

Vec2 ModulatedTranslation::inverse(Vec2 z) const {
  double y = z.y - t_.beta;
  for (int it = 0; it < 60; ++it) {
    double F = y + t_.beta * (1.0 + amp_ * std::sin(kTwoPi * y)) - z.y;
    double dF = 1.0 + kTwoPi * t_.beta * amp_ * std::cos(kTwoPi * y);
    double dy = F / dF;
    y -= dy;
    if (std::abs(dy) < 1e-16 * (1.0 + std::abs(y))) break;
  }
  double s = 1.0 + amp_ * std::sin(kTwoPi * y);
  return {z.x - s * t_.alpha, y};
}

double ModulatedTranslation::displacement_bound() const {
  return (1.0 + std::abs(amp_)) * t_.vec().norm();
}

MapSpec ModulatedTranslation::spec() const {
  return {"modulated_translation",
          {{"alpha", format_real(t_.alpha)}, {"beta", format_real(t_.beta)}, {"amp", format_real(amp_)}}};
}

ConjugatedMap::ConjugatedMap(MapPtr base, std::array<int, 4> T) : base_(std::move(base)), T_(T) {
  int det = T[0] * T[3] - T[1] * T[2];
  if (det != 1 && det != -1)
    throw Error(ErrorKind::InvalidArgument, "dynamics", "conjugating matrix must lie in GL(2,Z)");
  Tinv_ = {T[3] * det, -T[1] * det, -T[2] * det, T[0] * det};
}

Vec2 ConjugatedMap::apply_matrix(Vec2 v) const {
  return {T_[0] * v.x + T_[1] * v.y, T_[2] * v.x + T_[3] * v.y};
}

Vec2 ConjugatedMap::apply_inverse_matrix(Vec2 v) const {
  return {Tinv_[0] * v.x + Tinv_[1] * v.y, Tinv_[2] * v.x + Tinv_[3] * v.y};
}

Vec2 ConjugatedMap::forward(Vec2 z) const {
  return apply_matrix(base_->forward(apply_inverse_matrix(z)));
}

Vec2 ConjugatedMap::inverse(Vec2 z) const {
  return apply_matrix(base_->inverse(apply_inverse_matrix(z)));
}

double ConjugatedMap::displacement_bound() const {
  double n = std::hypot(std::hypot(T_[0], T_[1]), std::hypot(T_[2], T_[3]));
  return n * base_->displacement_bound();
}

std::vector<Vec2> ConjugatedMap::known_fixed_points() const {
  std::vector<Vec2> out;
  for (Vec2 p : base_->known_fixed_points()) out.push_back(TorusPoint::from(apply_matrix(p)).vec());
  return out;
}

ShiftedMap::ShiftedMap(MapPtr base, Vec2 m) : base_(std::move(base)), m_(m) {
  if (m.x != std::nearbyint(m.x) || m.y != std::nearbyint(m.y))
    throw Error(ErrorKind::InvalidArgument, "dynamics", "shift must be an integer vector");
}

namespace {

double param(const MapSpec& s, const std::string& key, double fallback, bool required) {
  auto it = s.params.find(key);
  if (it == s.params.end()) {
    if (required)
      throw Error(ErrorKind::Config, "map", "family '" + s.family + "' needs parameter '" + key + "'");
    return fallback;
  }
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Config, "map", "parameter '" + key + "' is not a finite real: '" + it->second + "'");
  }
}

RotationTarget target_param(const MapSpec& s) {
  RotationTarget d = RotationTarget::golden_silver();
  bool given = s.params.count("alpha") || s.params.count("beta");
  double a = param(s, "alpha", d.alpha, false);
  double b = param(s, "beta", d.beta, false);
  if (a == 0.0 && b == 0.0) throw Error(ErrorKind::Config, "map", "alpha and beta cannot both vanish");
  return given ? RotationTarget(a, b) : d;
}

}  // namespace

MapPtr make_map(const MapSpec& s) {
  const std::string& f = s.family;
  static const std::map<std::string, std::vector<std::string>> allowed = {
      {"rigid_rotation", {"alpha", "beta"}},
      {"translation", {"dx", "dy"}},
      {"identity", {}},
      {"double_shear", {"a", "b", "c1", "c2"}},
      {"modulated_translation", {"alpha", "beta", "amp"}},
      {"slowed_flow", {"alpha", "beta", "center_x", "center_y", "slow_exponent", "step"}},
  };
  auto fam = allowed.find(f);
  if (fam == allowed.end()) throw Error(ErrorKind::Config, "map", "unknown map family '" + f + "'");
  for (const auto& [k, v] : s.params)
    if (std::find(fam->second.begin(), fam->second.end(), k) == fam->second.end())
      throw Error(ErrorKind::Config, "map", "family '" + f + "' has no parameter '" + k + "'");
  if (f == "rigid_rotation") return std::make_shared<RigidRotation>(target_param(s));
  if (f == "translation")
    return std::make_shared<Translation>(Vec2{param(s, "dx", 0, true), param(s, "dy", 0, true)});
  if (f == "identity") return std::make_shared<Translation>(Vec2{0.0, 0.0});
  if (f == "double_shear")
    return std::make_shared<DoubleShear>(param(s, "a", 0, false), param(s, "b", 0, false),
                                         param(s, "c1", 0, true), param(s, "c2", 0, true));
  if (f == "modulated_translation") {
    try {
      return std::make_shared<ModulatedTranslation>(target_param(s), param(s, "amp", 0.1, false));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Config) throw;
      throw Error(ErrorKind::Config, "map", e.what());
    }
  }
  if (f == "slowed_flow") {
    SlowedFlowParams p;
    p.target = target_param(s);
    p.slow_center = {param(s, "center_x", 0.0, false), param(s, "center_y", 0.0, false)};
    p.slow_exponent = param(s, "slow_exponent", p.slow_exponent, false);
    p.integrator_step = param(s, "step", p.integrator_step, false);
    try {
      return std::make_shared<SlowedFlowMap>(p);
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, "map", e.what());
    }
  }
  throw Error(ErrorKind::Config, "map", "unknown map family '" + f + "'");
}

}  // namespace rotlab::dynamics
