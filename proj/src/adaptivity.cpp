#include "hpg/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace hpg {

namespace {

using Eigen::VectorXd;

constexpr int kExtraQuadrature = 24;

/// Reference-cell Legendre coefficients of the degree-q L^2 projection of samples g at Gauss nodes t.
VectorXd project(const VectorXd& g, const VectorXd& t, const VectorXd& w, int q) {
  VectorXd c = VectorXd::Zero(q + 1);
  for (Eigen::Index k = 0; k < t.size(); ++k) c += w(k) * g(k) * legendre_all(q, t(k));
  for (int j = 0; j <= q; ++j) c(j) *= (2 * j + 1) / 2.0;
  return c;
}

VectorXd evaluate(const VectorXd& c, const VectorXd& t) {
  VectorXd v(t.size());
  for (Eigen::Index k = 0; k < t.size(); ++k) v(k) = legendre_all(static_cast<int>(c.size()) - 1, t(k)).dot(c);
  return v;
}

}  // namespace

std::vector<CellEstimate> estimate_error(const EstimatorInput& in, EstimatorKind kind) {
  const Discretization& d = *in.disc;
  if (d.dim() != 1 || d.kind() != ConstraintKind::Obstacle)
    throw std::invalid_argument("estimate_error: 1D obstacle discretizations only");
  const FemFunction u = FemFunction::from_u(d, in.u);
  const FemFunction lambda = FemFunction::from_psi(d, in.lambda);
  const FemFunction psi = FemFunction::from_psi(d, in.psi);
  const Mesh1D& mesh = d.mesh_x();

  std::vector<CellEstimate> out;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double a = mesh.left(k), b = mesh.right(k), h = b - a;
    const int p = mesh.degree(k), q = p - 2;
    const auto [t, w] = gauss_legendre(p + kExtraQuadrature);
    const VectorXd x = (a + b) / 2 + h / 2 * t.array();
    VectorXd fx(x.size()), phix(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      fx(i) = in.f(x(i), 0.0);
      phix(i) = in.phi(x(i), 0.0);
    }
    const VectorXd f_hp = evaluate(project(fx, t, w, q), t);
    const VectorXd phi_hp = evaluate(project(phix, t, w, q), t);
    const VectorXd uc = u.cell_coeffs(k).col(0);
    const VectorXd ux = evaluate(uc, t);
    const VectorXd uxx = evaluate(legendre_derivative(legendre_derivative(uc)), t) * (4 / (h * h));
    const VectorXd lx = evaluate(lambda.cell_coeffs(k).col(0), t);
    auto integrate = [&](const VectorXd& g) { return h / 2 * w.dot(g); };

    CellEstimate e;
    e.cell = k;
    const double scale = h * h / (p * p);
    e.residual = scale * integrate((f_hp + uxx + lx).array().square().matrix());
    e.oscillation = scale * integrate((fx - f_hp).array().square().matrix());
    e.obstacle = integrate((phix - phi_hp).array().square().matrix());
    if (kind != EstimatorKind::ProximalGalerkin) {
      e.complementarity = kind == EstimatorKind::VariationalInequality
                              ? std::abs(integrate(lx.cwiseProduct(phi_hp - ux)))
                              : integrate(lx.cwiseProduct(phi_hp - ux).cwiseAbs());
      e.infeasibility = integrate((phi_hp - ux).cwiseMin(0.0).array().square().matrix());
    } else {
      const double a2 = in.alpha * in.alpha;
      e.residual *= a2;
      e.oscillation *= a2;
      e.obstacle *= a2;
      const VectorXd px = evaluate(psi.cell_coeffs(k).col(0), t);
      const VectorXd gap = ux + (-px.array()).exp().matrix() - phi_hp;
      e.infeasibility = integrate(gap.array().square().matrix());
    }
    out.push_back(e);
  }
  return out;
}

AnalyticityFit fit_analyticity(const Eigen::VectorXd& a) {
  double sj = 0, sy = 0, sjj = 0, sjy = 0;
  int n = 0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double mag = std::abs(a(j));
    if (!(mag >= 1e-300)) continue;
    const double y = std::abs(std::log(mag));
    sj += j;
    sy += y;
    sjj += double(j) * j;
    sjy += j * y;
    ++n;
  }
  AnalyticityFit fit;
  if (n < 3) {
    fit.degenerate = true;
    return fit;
  }
  const double det = n * sjj - sj * sj;
  fit.m = (n * sjy - sj * sy) / det;
  fit.b = (sy - fit.m * sj) / n;
  return fit;
}

AnalyticityFit analyticity(const Discretization& d, const Eigen::VectorXd& u, int cell) {
  return fit_analyticity(reexpand_u_in_legendre(d.space_x(), d.lift(u), cell).coeffs);
}

std::set<int> mark_cells(const std::vector<double>& eta2, double delta) {
  std::set<int> marked;
  double top = 0;
  for (double e : eta2) top = std::max(top, std::sqrt(e));
  if (!(top > 0)) return marked;
  for (std::size_t k = 0; k < eta2.size(); ++k)
    if (std::sqrt(eta2[k]) >= delta * top) marked.insert(static_cast<int>(k));
  return marked;
}

RefineResult hp_refine_step(const EstimatorInput& in, const std::vector<CellEstimate>& est, double sigma,
                            double delta) {
  if (!(sigma >= 0 && sigma < 1) || !(delta > 0 && delta < 1))
    throw std::invalid_argument("hp_refine_step: need sigma in [0, 1), delta in (0, 1)");
  std::vector<double> eta2;
  for (const auto& e : est) eta2.push_back(e.eta2());
  RefineResult r{in.disc->mesh_x(), mark_cells(eta2, delta), {}};
  for (int k : r.marked)
    if (analyticity(*in.disc, in.u, k).indicator() < sigma) r.p_refined.insert(k);
  r.mesh = refine_cells(in.disc->mesh_x(), r.marked, r.p_refined);
  return r;
}

std::vector<AdaptiveRow> run_adaptive(Mesh1D mesh, const Field& f, const Field& phi, const AdaptiveOptions& opts,
                                      const std::optional<ExactSolution1D>& exact, Mesh1D* final_mesh) {
  std::vector<AdaptiveRow> rows;
  for (int step = 0; step < opts.steps; ++step) {
    const Discretization d(mesh, ConstraintKind::Obstacle);
    const LvppSolver solver(d, f, phi, opts.lvpp);
    LvppState st = solver.initial_state();
    const SolveReport rep = solver.solve(opts.schedule, st);

    AdaptiveRow row;
    row.step = step;
    row.dofs = d.num_u0();
    row.h_min = mesh.h_min();
    row.h_max = mesh.h_max();
    row.p_min = mesh.p_min();
    row.p_max = mesh.p_max();
    row.newton = rep.newton_total();
    row.gmres_avg = rep.gmres_avg();
    row.t_assembly = rep.t_assembly();
    row.t_linsolve_avg = rep.t_linsolve_avg();
    row.t_total = rep.t_total;
    row.status = rep.status;
    row.h1_error = exact ? h1_error_1d(FemFunction::from_u(d, st.u), *exact)
                         : std::numeric_limits<double>::quiet_NaN();

    const EstimatorInput in{&d, st.u, st.psi, st.lambda(), st.alpha, f, phi};
    const auto est = estimate_error(in, opts.estimator);
    for (const auto& e : est) row.eta2_sum += e.eta2();
    rows.push_back(row);
    if (!rep.converged) break;
    if (step + 1 < opts.steps) mesh = hp_refine_step(in, est, opts.sigma, opts.delta).mesh;
  }
  if (final_mesh) *final_mesh = mesh;
  return rows;
}

void write_adaptive_csv(const std::vector<AdaptiveRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_adaptive_csv: cannot open " + path);
  os.precision(10);
  os << "step,dofs,h_min,h_max,p_min,p_max,eta2_sum,H1_error,newton_total,gmres_avg,t_assembly_s,"
        "t_linsolve_avg_s,t_total_s,status\n";
  for (const auto& r : rows)
    os << r.step << ',' << r.dofs << ',' << r.h_min << ',' << r.h_max << ',' << r.p_min << ',' << r.p_max << ','
       << r.eta2_sum << ',' << r.h1_error << ',' << r.newton << ',' << r.gmres_avg << ',' << r.t_assembly << ','
       << r.t_linsolve_avg << ',' << r.t_total << ',' << r.status << '\n';
}

}  // namespace hpg
