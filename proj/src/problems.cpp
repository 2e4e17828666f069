#include "hpg/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hpg {

namespace {

constexpr double kPi = std::numbers::pi;

// Contact point of 2 sin(w x) + a (x - x_ref) with the level 1, where the slopes also match.
double contact_point(double omega, double x_ref, double guess) {
  double x = guess;
  for (int it = 0; it < 100; ++it) {
    const double s = std::sin(omega * x), c = std::cos(omega * x);
    const double g = 2 * s - 2 * omega * c * (x - x_ref) - 1;
    const double dg = 2 * omega * omega * s * (x - x_ref);
    const double dx = g / dg;
    x -= dx;
    if (std::abs(dx) < 1e-16) break;
  }
  return x;
}

}  // namespace

double bessel_j0(double z) {
  const int n = 64 + static_cast<int>(std::abs(z));
  double s = 0.5 * (1.0 + std::cos(0.0));  // endpoints t = 0 and t = pi both give cos(0)
  for (int k = 1; k < n; ++k) s += std::cos(z * std::sin(kPi * k / n));
  return s / n;
}

OscillatoryExact::OscillatoryExact() : omega_(10 * kPi) {
  x0_ = contact_point(omega_, 0.0, 0.038);
  x3_ = contact_point(omega_, 1.0, 0.8534);
  a0_ = -2 * omega_ * std::cos(omega_ * x0_);
  a1_ = -2 * omega_ * std::cos(omega_ * x3_);
}

double OscillatoryExact::value(double x) const {
  const double s = 2 * std::sin(omega_ * x);
  if (x < x0_) return s + a0_ * x;
  if (x < x1()) return 1.0;
  if (x < x2()) return s - 1.0;
  if (x < x3_) return 1.0;
  return s + a1_ * (x - 1);
}

double OscillatoryExact::derivative(double x) const {
  const double c = 2 * omega_ * std::cos(omega_ * x);
  if (x < x0_) return c + a0_;
  if (x < x1()) return 0.0;
  if (x < x2()) return c;
  if (x < x3_) return 0.0;
  return c + a1_;
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "obstacle1d-oscillatory") return ProblemKind::Obstacle1D;
  if (name == "obstacle2d-bessel") return ProblemKind::Obstacle2D;
  if (name == "gradient2d") return ProblemKind::Gradient2D;
  if (name == "thermoforming") return ProblemKind::Thermoforming;
  throw std::invalid_argument("unknown problem: " + name);
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Obstacle1D: return "obstacle1d-oscillatory";
    case ProblemKind::Obstacle2D: return "obstacle2d-bessel";
    case ProblemKind::Gradient2D: return "gradient2d";
    case ProblemKind::Thermoforming: return "thermoforming";
  }
  return "";
}

ProblemData make_problem(ProblemKind kind, double phi_inf) {
  const double omega = 10 * kPi;
  switch (kind) {
    case ProblemKind::Obstacle1D:
      return {kind, ConstraintKind::Obstacle, 1,
              [omega](double x, double) { return 2 * omega * omega * std::sin(omega * x); },
              [](double, double) { return 1.0; }, AlphaSchedule{0x1p-7, std::sqrt(2.0), 0x1p-3, true}, 1e-8};
    case ProblemKind::Obstacle2D:
      return {kind, ConstraintKind::Obstacle, 2, [](double, double) { return 100.0; },
              [](double x, double y) { return (1 + bessel_j0(20 * x)) * (1 + bessel_j0(20 * y)); },
              AlphaSchedule{0x1p-7, std::sqrt(2.0), 0x1p-3, true}, 0.0};
    case ProblemKind::Gradient2D:
      return {kind, ConstraintKind::Gradient, 2, [](double, double) { return 20.0; },
              [phi_inf](double x, double y) {
                auto outer = [](double t) { return t <= 0.25 || t >= 0.75; };
                return outer(x) || outer(y) ? 0.5 : phi_inf;
              },
              AlphaSchedule{0x1p-7, std::sqrt(2.0), 4.0, true}, 0.0, 1e-10};
    case ProblemKind::Thermoforming: {
      const auto t = thermoforming_data();
      return {kind, ConstraintKind::Obstacle, 2, t.f, t.phi0, AlphaSchedule{0x1p-6, 4.0, 1.0, false}, 1e-6};
    }
  }
  throw std::invalid_argument("make_problem: unknown kind");
}

ThermoformingData thermoforming_data() {
  ThermoformingData t;
  t.f = [](double, double) { return 100.0; };
  t.phi0 = [](double x, double y) {
    return 1.1 - 2 * std::max(std::abs(x - 0.5), std::abs(y - 0.5)) + std::cos(8 * kPi * x) * std::cos(8 * kPi * y) / 10;
  };
  t.xi = [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); };
  t.gamma = 1.0;
  t.g = [](double s) { return s <= 0 ? 0.2 : (s < 1 ? (1 - s) / 5 : 0.0); };
  t.dg = [](double s) { return s < 0 || s > 1 ? 0.0 : -0.2; };
  return t;
}

}  // namespace hpg
