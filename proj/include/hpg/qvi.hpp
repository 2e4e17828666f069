#pragma once

// Fixed-point solver for the thermoforming quasi-variational inequality
//
//   u <= Phi_0 + xi T,  u solves the obstacle problem with load f,
//   (grad T, grad q) + gamma (T, q) = (g(Phi_0 + xi T - u), q)  for all q in U (no boundary condition).
//
// Step I solves the obstacle problem for the current mould with LVPP, step II the temperature
// equation by Newton's method with matrix-free Jacobian products and GMRES left-preconditioned
// by a Cholesky factorization of A + gamma M.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hpg/lvpp.hpp"
#include "hpg/problems.hpp"

namespace hpg {

struct TemperatureOptions {
  /// Newton stops once sqrt(r^T (A + gamma M)^{-1} r) <= atol.
  double atol = 1e-8;
  int maxit = 30;
  GmresOptions gmres{1.5e-8, 1e-14, 200, PrecondSide::Left};
};

struct TemperatureReport {
  int newton = 0;
  std::vector<int> gmres;
  bool converged = false;
  std::string status;

  double gmres_avg() const;
};

/// Temperature equation on the full U space of `d` (boundary hats included). `u_full` are the
/// U coefficients of the membrane, `T` the initial guess on entry and the solution on exit.
TemperatureReport temperature_solve(const Discretization& d, const ThermoformingData& data,
                                    const Eigen::VectorXd& u_full, Eigen::VectorXd& T,
                                    const TemperatureOptions& opts = {});

struct ThermoformOptions {
  double tol = 3e-3;
  int maxit = 20;
  LvppOptions lvpp;
  AlphaSchedule schedule{0x1p-6, 4.0, 1.0, false};
  TemperatureOptions temperature;

  ThermoformOptions();
};

struct FixedPointStep {
  int newton_I = 0;
  double gmres_avg_I = 0.0;
  int newton_II = 0;
  double gmres_avg_II = 0.0;
  /// H^1 norm of u_i - u_{i-1}; u_0 = 0.
  double increment = 0.0;
  std::string status;
};

struct ThermoformReport {
  std::vector<FixedPointStep> steps;
  bool converged = false;
  std::string status;
  double t_total = 0.0;

  int fixed_point() const { return static_cast<int>(steps.size()); }
  double newton_I_avg() const;
  double gmres_I_avg() const;
  double newton_II_avg() const;
  double gmres_II_avg() const;
};

struct ThermoformResult {
  Eigen::VectorXd u;  // interior U coefficients
  Eigen::VectorXd T;  // full U coefficients
  ThermoformReport report;
};

/// Alternates steps I and II from T = 0 until the H^1 increment of u drops below opts.tol.
/// Stops with status "non-contraction" when the increment grows three times in a row.
ThermoformResult thermoform_solve(const TensorMesh2D& mesh, const ThermoformingData& data,
                                  const ThermoformOptions& opts = {});

/// Phi_0 + xi T as a field.
Field mould(const Discretization& d, const ThermoformingData& data, const Eigen::VectorXd& T);

/// Header p,fixed_point,newton_I,gmres_I,newton_II,gmres_II,status.
void write_thermoform_csv(const std::vector<std::pair<int, ThermoformReport>>& rows, const std::string& path);

}  // namespace hpg
