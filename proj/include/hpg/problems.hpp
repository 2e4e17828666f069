#pragma once

// Data of the model problems and the closed-form solution of the 1D oscillatory obstacle problem.

#include <optional>
#include <string>
#include <vector>

#include "hpg/lvpp.hpp"
#include "hpg/space.hpp"

namespace hpg {

/// Bessel J_0 by the trapezoidal rule on J_0(z) = (1/pi) int_0^pi cos(z sin t) dt, which
/// converges geometrically for this periodic analytic integrand.
double bessel_j0(double z);

/// Exact solution of -u'' = c sin(omega x), u <= 1 on (0, 1), omega = 10 pi, c = 2 omega^2.
class OscillatoryExact {
 public:
  OscillatoryExact();

  double omega() const { return omega_; }
  double x0() const { return x0_; }
  double x1() const { return 0.05; }
  double x2() const { return 0.85; }
  double x3() const { return x3_; }
  double a0() const { return a0_; }
  double a1() const { return a1_; }

  double value(double x) const;
  double derivative(double x) const;
  /// Points where u is not smooth.
  std::vector<double> breakpoints() const { return {x0_, x1(), x2(), x3_}; }

 private:
  double omega_;
  double x0_, x3_, a0_, a1_;
};

enum class ProblemKind { Obstacle1D, Obstacle2D, Gradient2D, Thermoforming };

ProblemKind problem_kind_from_string(const std::string& name);
std::string to_string(ProblemKind kind);

/// Right-hand side, constraint and default solver parameters of one model problem.
struct ProblemData {
  ProblemKind kind;
  ConstraintKind constraint;
  int dim;
  Field f;
  Field phi;
  AlphaSchedule schedule;
  double beta;
  /// Absolute Newton tolerance in the dual residual norm.
  double newton_atol = 1e-5;
};

/// `phi_inf` replaces the unbounded constraint value of the gradient problem.
ProblemData make_problem(ProblemKind kind, double phi_inf = 1e3);

inline constexpr double kDefaultPhiInf = 1e3;

/// Thermoforming data: Phi_0, xi, gamma, g and f.
struct ThermoformingData {
  Field f;
  Field phi0;
  Field xi;
  double gamma = 1.0;
  std::function<double(double)> g;
  std::function<double(double)> dg;
};

ThermoformingData thermoforming_data();

}  // namespace hpg
