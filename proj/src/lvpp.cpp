#include "hpg/lvpp.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hpg {

namespace {

using Eigen::VectorXd;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::vector<double> AlphaSchedule::values() const {
  if (!(alpha0 > 0) || !(alpha_max >= alpha0)) throw std::invalid_argument("AlphaSchedule: need 0 < alpha0 <= alpha_max");
  if (!(rate > 1)) throw std::invalid_argument("AlphaSchedule: rate must exceed 1");
  std::vector<double> out{std::min(alpha0, alpha_max)};
  const double snap = alpha_max * (1 - 1e-12);
  for (;;) {
    const double a = out.back();
    if (a == alpha_max && (!repeat_final || (out.size() >= 2 && out[out.size() - 2] == alpha_max))) break;
    double next = rate * a;
    if (next >= snap) next = alpha_max;
    out.push_back(next);
  }
  return out;
}

Eigen::VectorXd LvppState::lambda() const { return (psi_prev - psi) / alpha; }

int SolveReport::newton_total() const {
  int n = 0;
  for (const auto& s : steps) n += s.newton;
  return n;
}

int SolveReport::gmres_total() const {
  int n = 0;
  for (const auto& s : steps)
    for (int g : s.gmres) n += g;
  return n;
}

double SolveReport::gmres_avg() const {
  const int n = newton_total();
  return n > 0 ? static_cast<double>(gmres_total()) / n : 0.0;
}

double SolveReport::t_assembly() const {
  double t = 0;
  for (const auto& s : steps) t += s.t_assembly;
  return t;
}

double SolveReport::t_linsolve_avg() const {
  const int n = newton_total();
  double t = 0;
  for (const auto& s : steps) t += s.t_assembly + s.t_linsolve;
  return n > 0 ? t / n : 0.0;
}

nlohmann::json SolveReport::to_json() const {
  nlohmann::json j;
  j["status"] = status;
  j["converged"] = converged;
  j["newton_total"] = newton_total();
  j["gmres_avg"] = gmres_avg();
  j["t_total_s"] = t_total;
  auto& arr = j["steps"] = nlohmann::json::array();
  for (const auto& s : steps)
    arr.push_back({{"alpha", s.alpha},
                   {"newton", s.newton},
                   {"gmres", s.gmres},
                   {"residuals", s.residuals},
                   {"t_assembly_s", s.t_assembly},
                   {"t_linsolve_s", s.t_linsolve},
                   {"converged", s.converged},
                   {"status", s.status}});
  return j;
}

LvppSolver::LvppSolver(Discretization d, Field f, Field phi, LvppOptions opts)
    : d_(std::move(d)), f_(std::move(f)), phi_(std::move(phi)), opts_(opts) {
  A_ = assemble_stiffness(d_);
  B_ = assemble_gram(d_);
  A_solver_ = SpdSolver(A_, d_.dim() == 1);
  E_ = assemble_E_beta(d_, opts_.beta);
  f_load_ = d_.load(f_);
  psi_mass_ = d_.psi_mass();
  if (d_.kind() == ConstraintKind::Obstacle)
    phi_load_ = d_.psi_load(phi_);
  else
    phi_grids_ = sample_cells(d_, phi_, 1e-12);
}

LvppState LvppSolver::initial_state() const {
  LvppState s;
  s.u = VectorXd::Zero(d_.num_u0());
  s.psi = VectorXd::Zero(d_.num_psi());
  s.psi_prev = VectorXd::Zero(d_.num_psi());
  return s;
}

NonlinearTerms LvppSolver::terms(const Eigen::VectorXd& psi, bool jacobian) const {
  return d_.kind() == ConstraintKind::Obstacle ? obstacle_terms(d_, psi, jacobian)
                                               : gradient_terms(d_, psi, phi_grids_, jacobian);
}

Residual LvppSolver::residual(const LvppState& s, double alpha, NonlinearTerms* out) const {
  NonlinearTerms t = terms(s.psi, out != nullptr);
  Residual r;
  r.diverged = t.diverged;
  r.b_u = alpha * f_load_ + B_ * (s.psi_prev - s.psi) - alpha * (A_ * s.u);
  if (d_.kind() == ConstraintKind::Obstacle)
    r.b_psi = phi_load_ - B_.transpose() * s.u - t.load;
  else
    r.b_psi = t.load - B_.transpose() * s.u;
  if (out) *out = std::move(t);
  return r;
}

double LvppSolver::norm(const Residual& r) const {
  if (opts_.newton.norm == ResidualNorm::Euclidean) return r.norm();
  const double nu = r.b_u.dot(A_solver_.solve(r.b_u));
  const double np = r.b_psi.cwiseAbs2().cwiseQuotient(psi_mass_).sum();
  return std::sqrt(std::max(nu, 0.0) + np);
}

StepReport LvppSolver::newton(LvppState& s, double alpha) const {
  const NewtonOptions& no = opts_.newton;
  StepReport rep;
  rep.alpha = alpha;
  auto t0 = Clock::now();
  NonlinearTerms t;
  Residual r = residual(s, alpha, &t);
  rep.t_assembly += seconds_since(t0);
  double norm = this->norm(r);
  rep.residuals.push_back(norm);
  const double target = std::max(no.rtol * norm, no.atol);
  while (true) {
    if (!std::isfinite(norm) || r.diverged) {
      rep.status = "diverged";
      return rep;
    }
    if (norm <= target) {
      rep.converged = true;
      rep.status = "ok";
      return rep;
    }
    if (rep.newton >= no.maxit) {
      rep.status = "maxit";
      return rep;
    }
    auto t1 = Clock::now();
    SaddleSystem sys{&A_, &A_solver_, &B_, &t.jacobian, &E_, alpha};
    SaddleSolution sol;
    try {
      if (no.linear == LinearSolverKind::LU) {
        sol = monolithic_solve(sys, r.b_u, r.b_psi);
      } else {
        auto t2 = Clock::now();
        const BlockPreconditioner pre = d_.kind() == ConstraintKind::Obstacle
                                            ? build_obstacle_preconditioner(d_, alpha, t.jacobian, E_)
                                            : build_gradient_preconditioner(t.jacobian, E_);
        rep.t_assembly += seconds_since(t2);
        t1 = Clock::now();
        sol = schur_solve(sys, r.b_u, r.b_psi, pre, no.gmres);
        rep.gmres.push_back(sol.gmres_iterations);
      }
    } catch (const std::runtime_error& e) {
      rep.status = std::string("linear solve failed: ") + e.what();
      return rep;
    }
    rep.t_linsolve += seconds_since(t1);
    ++rep.newton;
    if (!sol.du.allFinite() || !sol.dpsi.allFinite()) {
      rep.status = "linear solve failed";
      return rep;
    }

    auto t3 = Clock::now();
    LvppState trial = s;
    double step = 1.0;
    trial.u = s.u + sol.du;
    trial.psi = s.psi + sol.dpsi;
    Residual rt = residual(trial, alpha, &t);
    if (no.line_search) {
      int halvings = 0;
      while ((!(this->norm(rt) < norm) || rt.diverged) && halvings < no.max_halvings) {
        step *= 0.5;
        ++halvings;
        trial.u = s.u + step * sol.du;
        trial.psi = s.psi + step * sol.dpsi;
        rt = residual(trial, alpha, &t);
      }
      if (halvings == no.max_halvings && !(this->norm(rt) < norm)) {
        rep.t_assembly += seconds_since(t3);
        rep.status = "line search stagnation";
        return rep;
      }
    }
    rep.t_assembly += seconds_since(t3);
    s.u = trial.u;
    s.psi = trial.psi;
    r = std::move(rt);
    norm = this->norm(r);
    rep.residuals.push_back(norm);
  }
}

SolveReport LvppSolver::solve(const AlphaSchedule& schedule, LvppState& state) const {
  if (state.u.size() != d_.num_u0() || state.psi.size() != d_.num_psi()) state = initial_state();
  SolveReport report;
  const auto t0 = Clock::now();
  for (double alpha : schedule.values()) {
    state.psi_prev = state.psi;
    state.alpha = alpha;
    ++state.k;
    StepReport step = newton(state, alpha);
    const bool ok = step.converged;
    report.steps.push_back(std::move(step));
    if (!ok) {
      report.converged = false;
      report.status = report.steps.back().status;
      break;
    }
  }
  report.t_total = seconds_since(t0);
  return report;
}

}  // namespace hpg
