#pragma once

// One-dimensional hp-adaptivity for the obstacle problem: residual-type cell estimators,
// the Legendre-decay analyticity indicator and the mark/refine step.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hpg/error.hpp"
#include "hpg/lvpp.hpp"
#include "hpg/mesh.hpp"

namespace hpg {

/// Squared contributions of one cell. For the variational-inequality estimator
///   residual        h^2/p^2 ||f_hp + u'' + lambda||^2
///   oscillation     h^2/p^2 ||f - f_hp||^2
///   obstacle        ||phi - phi_hp||^2
///   complementarity |(lambda, phi_hp - u)|
///   infeasibility   ||min(phi_hp - u, 0)||^2
/// The proximal Galerkin variant scales the first three by alpha^2 and puts
/// ||u + exp(-psi) - phi_hp||^2 in `infeasibility`, leaving complementarity at zero.
/// VariationalInequalityL1 uses int |lambda (phi_hp - u)| for the complementarity term.
struct CellEstimate {
  int cell = 0;
  double residual = 0.0;
  double oscillation = 0.0;
  double obstacle = 0.0;
  double complementarity = 0.0;
  double infeasibility = 0.0;

  double eta2() const { return residual + oscillation + obstacle + complementarity + infeasibility; }
};

enum class EstimatorKind { VariationalInequality, VariationalInequalityL1, ProximalGalerkin };

struct EstimatorInput {
  const Discretization* disc = nullptr;
  Eigen::VectorXd u;       // interior U_0 coefficients
  Eigen::VectorXd psi;     // Psi coefficients of the last iterate
  Eigen::VectorXd lambda;  // (psi_prev - psi) / alpha
  double alpha = 1.0;
  Field f;
  Field phi;
};

std::vector<CellEstimate> estimate_error(const EstimatorInput& in,
                                         EstimatorKind kind = EstimatorKind::VariationalInequality);

/// Least-squares fit j m + b = |log |a_j||.
struct AnalyticityFit {
  double m = 0.0;
  double b = 0.0;
  /// Fewer than three usable coefficients; the indicator is then 1.
  bool degenerate = false;

  double indicator() const { return degenerate ? 1.0 : std::exp(-m); }
};

/// Coefficients below 1e-300 in magnitude are left out of the fit.
AnalyticityFit fit_analyticity(const Eigen::VectorXd& legendre_coeffs);
/// Fit of u restricted to `cell` (interior U_0 coefficients of a 1D discretization).
AnalyticityFit analyticity(const Discretization& d, const Eigen::VectorXd& u, int cell);

/// Cells with eta >= delta * max eta; empty when max eta = 0.
std::set<int> mark_cells(const std::vector<double>& eta2, double delta);

struct RefineResult {
  Mesh1D mesh;
  std::set<int> marked;
  std::set<int> p_refined;
};

/// Marked cells are bisected; those with analyticity indicator below sigma also get p + 1 on
/// both children.
RefineResult hp_refine_step(const EstimatorInput& in, const std::vector<CellEstimate>& est, double sigma,
                            double delta);

struct AdaptiveRow {
  int step = 0;
  int dofs = 0;
  double h_min = 0.0, h_max = 0.0;
  int p_min = 0, p_max = 0;
  double eta2_sum = 0.0;
  double h1_error = 0.0;  // NaN without an exact solution
  int newton = 0;
  double gmres_avg = 0.0;
  double t_assembly = 0.0;
  double t_linsolve_avg = 0.0;
  double t_total = 0.0;
  std::string status;
};

struct AdaptiveOptions {
  int steps = 10;
  double sigma = 0.8;
  double delta = 0.7;
  EstimatorKind estimator = EstimatorKind::VariationalInequality;
  LvppOptions lvpp;
  AlphaSchedule schedule;
};

/// Solve, estimate, refine, repeat; every mesh starts from the zero initial guess.
std::vector<AdaptiveRow> run_adaptive(Mesh1D mesh, const Field& f, const Field& phi, const AdaptiveOptions& opts,
                                      const std::optional<ExactSolution1D>& exact = std::nullopt,
                                      Mesh1D* final_mesh = nullptr);

void write_adaptive_csv(const std::vector<AdaptiveRow>& rows, const std::string& path);

}  // namespace hpg
