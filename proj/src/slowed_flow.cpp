#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "rotlab/dynamics.hpp"
#include "rotlab/error.hpp"

namespace rotlab::dynamics {

namespace {

constexpr double kPi = std::numbers::pi;

double profile_base(double u, double v) {
  // (sin^2 pi u + sin^2 pi v)/2
  return (2.0 - std::cos(2.0 * kPi * u) - std::cos(2.0 * kPi * v)) * 0.25;
}

}  // namespace

double slowed_flow_normalization(double exponent) {
  if (!(exponent >= 0.0 && exponent < 2.0))
    throw Error(ErrorKind::InvalidArgument, "dynamics", "slow exponent must lie in [0, 2)");
  if (exponent == 0.0) return 1.0;
  using boost::math::quadrature::gauss;
  // polar coordinates about the zero, eight octants of the square [-1/2,1/2]^2,
  // radial variable u = r^(2-exponent) to absorb the r^(1-exponent) singularity
  const double p = 2.0 - exponent;
  double total = 0.0;
  for (int oct = 0; oct < 8; ++oct) {
    double th0 = oct * kPi / 4, th1 = th0 + kPi / 4;
    auto angular = [&](double th) {
      double c = std::cos(th), s = std::sin(th);
      double R = 0.5 / std::max(std::abs(c), std::abs(s));
      auto radial = [&](double u) {
        double r = std::pow(u, 1.0 / p);
        if (r == 0.0) return std::pow(kPi * kPi / 2.0, -exponent / 2.0) / p;
        double g = profile_base(r * c, r * s);
        return std::pow(g / (r * r), -exponent / 2.0) / p;
      };
      return gauss<double, 30>::integrate(radial, 0.0, std::pow(R, p));
    };
    total += gauss<double, 30>::integrate(angular, th0, th1);
  }
  return total;
}

SlowedFlowMap::SlowedFlowMap(SlowedFlowParams p) : p_(p) {
  if (!(p.integrator_step > 0.0 && p.integrator_step <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "dynamics", "integrator step must lie in (0, 1]");
  if (!p.slow_center.finite())
    throw Error(ErrorKind::InvalidArgument, "dynamics", "slow center must be finite");
  p_.slow_center = TorusPoint::from(p.slow_center).vec();
  kappa_ = slowed_flow_normalization(p.slow_exponent);
  steps_ = static_cast<int>(std::ceil(1.0 / p.integrator_step - 1e-9));
}

double SlowedFlowMap::speed(Vec2 z) const {
  if (p_.slow_exponent == 0.0) return 1.0;
  double g = profile_base(z.x - p_.slow_center.x, z.y - p_.slow_center.y);
  if (p_.slow_exponent == 1.0) return kappa_ * std::sqrt(g);
  return kappa_ * std::pow(g, p_.slow_exponent / 2.0);
}

double SlowedFlowMap::flow_parameter(Vec2 z, double T) const {
  // Every RK4 stage of dz/dt = s(z) t is a multiple of t, so the scheme reduces
  // exactly to the scalar equation tau' = s(z + tau t).
  const Vec2 t = p_.target.vec();
  int n = std::max(1, static_cast<int>(std::ceil(std::abs(T) * steps_ - 1e-9)));
  double h = T / n;
  double tau = 0.0;
  for (int i = 0; i < n; ++i) {
    double k1 = speed(z + tau * t);
    double k2 = speed(z + (tau + 0.5 * h * k1) * t);
    double k3 = speed(z + (tau + 0.5 * h * k2) * t);
    double k4 = speed(z + (tau + h * k3) * t);
    tau += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!std::isfinite(tau)) throw Error(ErrorKind::Integrator, "slowed_flow", "non-finite integrator state");
  return tau;
}

Vec2 SlowedFlowMap::forward(Vec2 z) const {
  Vec2 m = geometry::floor(z);
  Vec2 r = z - m;
  return m + (r + flow_parameter(r, 1.0) * p_.target.vec());
}

Vec2 SlowedFlowMap::inverse(Vec2 z) const {
  const Vec2 t = p_.target.vec();
  Vec2 m = geometry::floor(z);
  Vec2 r = z - m;
  double sz = speed(r);
  if (sz == 0.0) return z;
  // backward integration as the initial guess, then Newton on
  // R(sigma) = tau_forward(r - sigma t) - sigma, R' ~ -s(r)/s(r - sigma t)
  double sigma = -flow_parameter(r, -1.0);
  auto residual = [&](double s) { return flow_parameter(r - s * t, 1.0) - s; };
  double R = residual(sigma);
  for (int it = 0; it < 12 && std::abs(R) > 1e-15 * std::max(1.0, sigma); ++it) {
    double sw = speed(r - sigma * t);
    double stepv = R * sw / sz;
    double next = sigma + stepv, Rn = residual(next);
    for (int half = 0; half < 30 && std::abs(Rn) > std::abs(R); ++half) {
      stepv *= 0.5;
      next = sigma + stepv;
      Rn = residual(next);
    }
    if (std::abs(Rn) >= std::abs(R)) break;
    sigma = next;
    R = Rn;
  }
  return m + (r - sigma * t);
}

double SlowedFlowMap::displacement_bound() const {
  // the speed is at most kappa; the margin covers the RK4 overshoot
  return 1.001 * kappa_ * p_.target.vec().norm();
}

std::vector<Vec2> SlowedFlowMap::known_fixed_points() const {
  if (p_.slow_exponent == 0.0) return {};
  return {p_.slow_center};
}

MapSpec SlowedFlowMap::spec() const {
  return {"slowed_flow",
          {{"alpha", format_real(p_.target.alpha)},
           {"beta", format_real(p_.target.beta)},
           {"center_x", format_real(p_.slow_center.x)},
           {"center_y", format_real(p_.slow_center.y)},
           {"slow_exponent", format_real(p_.slow_exponent)},
           {"step", format_real(p_.integrator_step)}}};
}

}  // namespace rotlab::dynamics
