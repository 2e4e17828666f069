#pragma once

// Latent variable proximal point outer loop with Newton inner solves.
//
// Obstacle subproblem (u in U_0, psi in Psi):
//   alpha (grad u, grad v) + (psi, v)   = alpha (f, v) + (psi_prev, v)
//   (u, zeta) + (exp(-psi), zeta)       = (phi, zeta)
// Gradient subproblem (psi in Psi^d):
//   alpha (grad u, grad v) + (psi, grad v) = alpha (f, v) + (psi_prev, grad v)
//   (grad u, zeta) = (phi psi / sqrt(1 + |psi|^2), zeta)

#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "hpg/assembly.hpp"
#include "hpg/linalg.hpp"
#include "hpg/space.hpp"

namespace hpg {

/// alpha_{k+1} = min(rate * alpha_k, alpha_max). With `repeat_final` the sequence stops after
/// alpha_max has been used twice in a row, otherwise after its first use.
struct AlphaSchedule {
  double alpha0 = 0x1p-7;
  double rate = 1.4142135623730951;
  double alpha_max = 0x1p-3;
  bool repeat_final = true;

  std::vector<double> values() const;
};

enum class LinearSolverKind { Schur, LU };

/// Euclidean: plain l2 norm of (b_u, b_psi). Dual: sqrt(b_u^T A^{-1} b_u + b_psi^T M^{-1} b_psi),
/// the H^{-1} x L^2 norm of the residual functionals, independent of the basis scaling.
enum class ResidualNorm { Euclidean, Dual };

struct NewtonOptions {
  /// Stop once norm(r) <= max(rtol * norm(r_0), atol).
  double rtol = 0.0;
  double atol = 1e-5;
  int maxit = 100;
  bool line_search = false;
  int max_halvings = 10;
  ResidualNorm norm = ResidualNorm::Dual;
  LinearSolverKind linear = LinearSolverKind::Schur;
  GmresOptions gmres{1e-10, 1e-14, 150, PrecondSide::Right};
};

struct LvppOptions {
  double beta = 0.0;
  NewtonOptions newton;
};

struct LvppState {
  Eigen::VectorXd u;  // interior U_0 coefficients
  Eigen::VectorXd psi;
  Eigen::VectorXd psi_prev;
  int k = 0;
  double alpha = 0.0;

  /// (psi_prev - psi) / alpha.
  Eigen::VectorXd lambda() const;
};

struct Residual {
  Eigen::VectorXd b_u;
  Eigen::VectorXd b_psi;
  bool diverged = false;

  double norm() const { return std::sqrt(b_u.squaredNorm() + b_psi.squaredNorm()); }
};

struct StepReport {
  double alpha = 0.0;
  int newton = 0;
  std::vector<int> gmres;
  std::vector<double> residuals;
  double t_assembly = 0.0;
  double t_linsolve = 0.0;
  bool converged = false;
  std::string status;
};

struct SolveReport {
  std::vector<StepReport> steps;
  double t_total = 0.0;
  bool converged = true;
  std::string status = "ok";

  int newton_total() const;
  int gmres_total() const;
  /// Average GMRES iterations per Newton step (0 when LU was used).
  double gmres_avg() const;
  double t_assembly() const;
  /// Average wall time per linear solve including assembly.
  double t_linsolve_avg() const;

  nlohmann::json to_json() const;
};

class LvppSolver {
 public:
  LvppSolver(Discretization d, Field f, Field phi, LvppOptions opts);

  const Discretization& disc() const { return d_; }
  const LvppOptions& options() const { return opts_; }
  LvppState initial_state() const;

  Residual residual(const LvppState& s, double alpha, NonlinearTerms* terms = nullptr) const;
  double norm(const Residual& r) const;

  /// Newton iteration for one alpha step starting from s.u, s.psi; s.psi_prev is held fixed.
  StepReport newton(LvppState& s, double alpha) const;

  /// Full alpha loop; `state` (optional) provides the warm start and receives the result.
  SolveReport solve(const AlphaSchedule& schedule, LvppState& state) const;

  /// Load (f, v) over U_0 and the Psi load of phi (obstacle) or phi grids (gradient).
  const Eigen::VectorXd& f_load() const { return f_load_; }
  const SpMat& stiffness() const { return A_; }
  const SpMat& gram() const { return B_; }

 private:
  NonlinearTerms terms(const Eigen::VectorXd& psi, bool jacobian) const;

  Discretization d_;
  Field f_;
  Field phi_;
  LvppOptions opts_;
  SpMat A_;
  SpMat B_;
  SpdSolver A_solver_;
  CellBlocks E_;
  Eigen::VectorXd f_load_;
  Eigen::VectorXd phi_load_;
  std::vector<Eigen::MatrixXd> phi_grids_;
  Eigen::VectorXd psi_mass_;
};

}  // namespace hpg
