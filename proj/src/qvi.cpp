#include "hpg/qvi.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "hpg/transforms.hpp"

namespace hpg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Values of a full-U function on every cell grid.
std::vector<MatrixXd> grids_of(const Discretization& d, const VectorXd& full) {
  const FemFunction f = FemFunction::from_u(d, full);
  std::vector<MatrixXd> out;
  for (const auto& c : d.cells()) out.push_back(f.sample(d.grid_x(c), d.grid_y(c)));
  return out;
}

/// (w, v_i) over all of U for w given by its cell grid samples.
VectorXd load_from_grids(const Discretization& d, const std::vector<MatrixXd>& w) {
  VectorXd r(d.num_proj());
  for (const auto& c : d.cells()) {
    const MatrixXd tx = analysis_matrix(c.x.grid).topRows(c.x.p + 1);
    const MatrixXd ty = analysis_matrix(c.y.grid).topRows(c.y.p + 1);
    const MatrixXd coeffs = tx * w[c.index] * ty.transpose();
    const auto dofs = d.cell_proj_dofs(c);
    for (int a = 0; a <= c.x.p; ++a)
      for (int b = 0; b <= c.y.p; ++b) r(dofs[a * (c.y.p + 1) + b]) = coeffs(a, b);
  }
  return d.reexpansion(false).transpose() * d.proj_mass().cwiseProduct(r);
}

}  // namespace

double TemperatureReport::gmres_avg() const {
  if (gmres.empty()) return 0.0;
  double s = 0;
  for (int g : gmres) s += g;
  return s / gmres.size();
}

TemperatureReport temperature_solve(const Discretization& d, const ThermoformingData& data,
                                    const Eigen::VectorXd& u_full, Eigen::VectorXd& T,
                                    const TemperatureOptions& opts) {
  if (!(data.gamma > 0)) throw std::invalid_argument("temperature_solve: gamma must be positive");
  const SpMat K = d.stiffness(false) + data.gamma * d.mass_u(false);
  Eigen::SimplicialLLT<SpMat> chol(K);
  if (chol.info() != Eigen::Success) throw std::runtime_error("temperature_solve: factorization failed");
  if (T.size() != K.rows()) T = VectorXd::Zero(K.rows());

  const auto phi0 = sample_cells(d, data.phi0);
  const auto xi = sample_cells(d, data.xi);
  const auto ug = grids_of(d, u_full);
  auto argument = [&](const std::vector<MatrixXd>& tg) {
    std::vector<MatrixXd> s(tg.size());
    for (size_t k = 0; k < tg.size(); ++k) s[k] = phi0[k] + xi[k].cwiseProduct(tg[k]) - ug[k];
    return s;
  };
  auto residual = [&](const std::vector<MatrixXd>& s) {
    std::vector<MatrixXd> w(s.size());
    for (size_t k = 0; k < s.size(); ++k) w[k] = s[k].unaryExpr(data.g);
    return VectorXd(K * T - load_from_grids(d, w));
  };
  auto norm = [&](const VectorXd& r) { return std::sqrt(std::max(r.dot(chol.solve(r)), 0.0)); };

  TemperatureReport rep;
  auto s = argument(grids_of(d, T));
  VectorXd r = residual(s);
  while (true) {
    const double nr = norm(r);
    if (!std::isfinite(nr)) {
      rep.status = "diverged";
      return rep;
    }
    if (nr <= opts.atol) {
      rep.converged = true;
      rep.status = "ok";
      return rep;
    }
    if (rep.newton >= opts.maxit) {
      rep.status = "maxit";
      return rep;
    }
    std::vector<MatrixXd> weight(s.size());
    for (size_t k = 0; k < s.size(); ++k) weight[k] = s[k].unaryExpr(data.dg).cwiseProduct(xi[k]);
    const LinearOp jac = [&](const VectorXd& v) {
      auto vg = grids_of(d, v);
      for (size_t k = 0; k < vg.size(); ++k) vg[k] = vg[k].cwiseProduct(weight[k]);
      return VectorXd(K * v - load_from_grids(d, vg));
    };
    const LinearOp pre = [&](const VectorXd& v) { return VectorXd(chol.solve(v)); };
    const GmresResult g = gmres(jac, -r, pre, opts.gmres);
    rep.gmres.push_back(g.iterations);
    ++rep.newton;
    if (!g.x.allFinite()) {
      rep.status = "linear solve failed";
      return rep;
    }
    T += g.x;
    s = argument(grids_of(d, T));
    r = residual(s);
  }
}

Field mould(const Discretization& d, const ThermoformingData& data, const Eigen::VectorXd& T) {
  const FemFunction t = FemFunction::from_u(d, T);
  return [t, phi0 = data.phi0, xi = data.xi](double x, double y) { return phi0(x, y) + xi(x, y) * t.value(x, y); };
}

ThermoformOptions::ThermoformOptions() {
  lvpp.beta = 1e-6;
  lvpp.newton.gmres.rtol = 1e-7;
  lvpp.newton.gmres.atol = 1e-7;
}

double ThermoformReport::newton_I_avg() const {
  double s = 0;
  for (const auto& st : steps) s += st.newton_I;
  return steps.empty() ? 0.0 : s / steps.size();
}

double ThermoformReport::gmres_I_avg() const {
  double n = 0, g = 0;
  for (const auto& st : steps) {
    n += st.newton_I;
    g += st.newton_I * st.gmres_avg_I;
  }
  return n > 0 ? g / n : 0.0;
}

double ThermoformReport::newton_II_avg() const {
  double s = 0;
  for (const auto& st : steps) s += st.newton_II;
  return steps.empty() ? 0.0 : s / steps.size();
}

double ThermoformReport::gmres_II_avg() const {
  double n = 0, g = 0;
  for (const auto& st : steps) {
    n += st.newton_II;
    g += st.newton_II * st.gmres_avg_II;
  }
  return n > 0 ? g / n : 0.0;
}

ThermoformResult thermoform_solve(const TensorMesh2D& mesh, const ThermoformingData& data,
                                  const ThermoformOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Discretization d(mesh, ConstraintKind::Obstacle);
  const SpMat H1 = d.stiffness() + d.mass_u();
  ThermoformResult out;
  out.u = VectorXd::Zero(d.num_u0());
  out.T = VectorXd::Zero(d.num_u());
  ThermoformReport& rep = out.report;
  int growing = 0;

  for (int it = 0; it < opts.maxit; ++it) {
    FixedPointStep st;
    const LvppSolver obstacle(d, data.f, mould(d, data, out.T), opts.lvpp);
    LvppState s = obstacle.initial_state();
    const SolveReport lr = obstacle.solve(opts.schedule, s);
    st.newton_I = lr.newton_total();
    st.gmres_avg_I = lr.gmres_avg();
    const VectorXd du = s.u - out.u;
    st.increment = std::sqrt(std::max(du.dot(H1 * du), 0.0));
    out.u = s.u;
    if (!lr.converged) {
      st.status = "step I: " + lr.status;
      rep.steps.push_back(st);
      rep.status = st.status;
      break;
    }

    const TemperatureReport tr = temperature_solve(d, data, d.lift(out.u), out.T, opts.temperature);
    st.newton_II = tr.newton;
    st.gmres_avg_II = tr.gmres_avg();
    st.status = tr.converged ? "ok" : "step II: " + tr.status;
    rep.steps.push_back(st);
    if (!tr.converged) {
      rep.status = st.status;
      break;
    }
    if (it > 0 && st.increment <= opts.tol) {
      rep.converged = true;
      rep.status = "ok";
      break;
    }
    const size_t n = rep.steps.size();
    growing = n >= 2 && st.increment > rep.steps[n - 2].increment ? growing + 1 : 0;
    if (growing >= 3) {
      rep.status = "non-contraction";
      break;
    }
  }
  if (rep.status.empty()) rep.status = "maxit";
  rep.t_total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_thermoform_csv(const std::vector<std::pair<int, ThermoformReport>>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_thermoform_csv: cannot open " + path);
  os.precision(6);
  os << "p,fixed_point,newton_I,gmres_I,newton_II,gmres_II,t_total_s,status\n";
  for (const auto& [p, r] : rows)
    os << p << ',' << r.fixed_point() << ',' << r.newton_I_avg() << ',' << r.gmres_I_avg() << ','
       << r.newton_II_avg() << ',' << r.gmres_II_avg() << ',' << r.t_total << ',' << r.status << '\n';
}

}  // namespace hpg
