// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hpg/adaptivity.hpp"
#include "hpg/assembly.hpp"
#include "hpg/basis.hpp"
#include "hpg/error.hpp"
#include "hpg/linalg.hpp"
#include "hpg/pdas.hpp"
#include "hpg/problems.hpp"
#include "hpg/qvi.hpp"
#include "hpg/study.hpp"

using namespace hpg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Tolerances and bands.
constexpr double kBasisTol = 1e-12;
constexpr double kMassTol = 1e-12;
constexpr double kCholeskyTol = 1e-10;
constexpr double kSchurTol = 1e-7;
constexpr int kObstacle1dSpread = 2;
constexpr double kObstacle2dGrowth = 2.0;
constexpr double kGradientSpread = 2.0;
constexpr double kFreeBoundaryTol = 1e-3;
constexpr double kPlateauTol = 1e-4;
constexpr double kRateOne = 1.0, kRateOneTol = 0.15;
constexpr double kRateUniform = 1.4;
constexpr double kRateHp = 4.0;
constexpr int kBessel_lo = 19, kBessel_hi = 29;
constexpr int kGradient_lo = 59, kGradient_hi = 94;
constexpr double kOrderSlack = 0.5;
constexpr double kTable1Gmres = 40.0;
constexpr int kFixedPoint = 4;
constexpr double kNewtonI_lo = 12, kNewtonI_hi = 20;
constexpr double kGmresII = 4.0;
constexpr double kFeasibility = 1e-9;
constexpr double kDerivOrder = 2.0, kDerivOrderTol = 0.1;

// Gradient-order reference: aligned mesh, cells per direction and degree.
constexpr int kGradientRefCells = 16;
constexpr int kGradientRefP = 6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string join(const std::vector<double>& v, const char* f = "%.3g") {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt(f, x);
  return s;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (int x : v) s += (s.empty() ? "" : " ") + std::to_string(x);
  return s;
}

VectorXd random_vec(Eigen::Index n, unsigned seed, double scale = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

ExactSolution1D oscillatory() {
  static const OscillatoryExact ex;
  return {[](double x) { return ex.value(x); }, [](double x) { return ex.derivative(x); }, ex.breakpoints()};
}

Outcome basis_identities() {
  const auto [x, w] = gauss_legendre<double>(30);
  double orth = 0, deriv = 0;
  for (int n = 0; n <= 20; ++n)
    for (int m = 0; m <= 20; ++m) {
      double s = 0;
      for (int k = 0; k < x.size(); ++k) s += w(k) * legendre_eval(n, x(k)) * legendre_eval(m, x(k));
      orth = std::max(orth, std::abs(s - (n == m ? 2.0 / (2 * n + 1) : 0.0)));
    }
  // W_n(t) = -int_{-1}^t P_{n+1}, by Gauss quadrature on [-1, t].
  for (int n = 0; n <= 20; ++n)
    for (double t = -1.0; t <= 1.0 + 1e-12; t += 0.05) {
      double s = 0;
      for (int k = 0; k < x.size(); ++k) {
        const double y = -1 + (t + 1) * (x(k) + 1) / 2;
        s += w(k) * (t + 1) / 2 * legendre_eval(n + 1, y);
      }
      deriv = std::max(deriv, std::abs(wn_eval(n, t) + s));
    }
  return {orth <= kBasisTol && deriv <= kBasisTol, fmt("orthogonality %.1e, W_n' = -P_{n+1} %.1e", orth, deriv)};
}

Outcome mass_lemma() {
  const Mesh1D mesh({0.0, 0.03, 0.2, 0.21, 0.6, 1.0}, {32, 7, 1, 20, 32});
  const LegendreSpace1D psi(mesh, 0);
  const VectorXd md = psi.mass_diag();
  double off = 0, diag = 0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const int q = psi.cell_degree(c);
    const double h = mesh.right(c) - mesh.left(c);
    const auto [x, w] = gauss_legendre<double>(q + 2);
    MatrixXd g = MatrixXd::Zero(q + 1, q + 1);
    for (int k = 0; k < x.size(); ++k) {
      const VectorXd p = legendre_all(q, x(k));
      g += w(k) * h / 2 * p * p.transpose();
    }
    for (int i = 0; i <= q; ++i) {
      diag = std::max(diag, std::abs(md(psi.cell_offset(c) + i) - h / (2 * i + 1)) / (h / (2 * i + 1)));
      diag = std::max(diag, std::abs(g(i, i) - h / (2 * i + 1)) / (h / (2 * i + 1)));
      for (int j = 0; j <= q; ++j)
        if (i != j) off = std::max(off, std::abs(g(i, j)) / h);
    }
  }
  return {off <= kMassTol && diag <= kMassTol, fmt("p <= 32 nonuniform: off-diagonal %.1e, diagonal rel %.1e", off, diag)};
}

Outcome reverse_cholesky() {
  const Discretization d(uniform_mesh_1d(0, 1, 5, 10), ConstraintKind::Obstacle);
  const SpMat a = assemble_stiffness(d);
  const ReverseCholesky f(a);
  const SpMat L = f.factor();
  const MatrixXd rec = MatrixXd(SpMat(L.transpose() * L)) - MatrixXd(a);
  const double rel = rec.norm() / MatrixXd(a).norm();
  return {rel <= kCholeskyTol && L.nonZeros() <= a.nonZeros(),
          fmt("relative reconstruction %.1e, nnz(L) %ld, nnz(A) %ld", rel, long(L.nonZeros()), long(a.nonZeros()))};
}

Outcome schur_vs_lu() {
  double worst = 0;
  for (bool two_d : {false, true}) {
    const Discretization d = two_d ? Discretization(uniform_mesh_2d(0, 1, 4, 3), ConstraintKind::Obstacle)
                                   : Discretization(uniform_mesh_1d(0, 1, 3, 4), ConstraintKind::Obstacle);
    const SpMat A = assemble_stiffness(d), B = assemble_gram(d);
    const SpdSolver solver(A, !two_d);
    const CellBlocks D = obstacle_terms(d, random_vec(d.num_psi(), 3, 0.5)).jacobian;
    const CellBlocks E = assemble_E_beta(d, 0.0);
    const double alpha = 0.7;
    const SaddleSystem sys{&A, &solver, &B, &D, &E, alpha};
    const auto pre = build_obstacle_preconditioner(d, alpha, D, E);
    const VectorXd bu = random_vec(d.num_u0(), 4), bp = random_vec(d.num_psi(), 5);
    const auto s = schur_solve(sys, bu, bp, pre, {1e-12, 1e-15, 500, PrecondSide::Right});
    const auto m = monolithic_solve(sys, bu, bp);
    const double scale = std::sqrt(m.du.squaredNorm() + m.dpsi.squaredNorm());
    worst = std::max(worst, std::sqrt((s.du - m.du).squaredNorm() + (s.dpsi - m.dpsi).squaredNorm()) / scale);
  }
  return {worst <= kSchurTol, fmt("max relative difference %.1e (1D 3 cells p 4, 2D 4x4 p 3)", worst)};
}

Outcome obstacle_bench() {
  std::vector<int> one, two;
  bool conv = true;
  for (int p : {4, 8, 16, 32}) {
    const auto r = bench_preconditioner(ConstraintKind::Obstacle, 1, 10, p, 0.0);
    one.push_back(r.iterations);
    conv = conv && r.converged;
  }
  for (int p : {4, 8, 16}) {
    const auto r = bench_preconditioner(ConstraintKind::Obstacle, 2, 4, p, 0.0);
    two.push_back(r.iterations);
    conv = conv && r.converged;
  }
  const int spread = *std::max_element(one.begin(), one.end()) - *std::min_element(one.begin(), one.end());
  const double growth = double(*std::max_element(two.begin(), two.end())) / *std::min_element(two.begin(), two.end());
  return {conv && spread <= kObstacle1dSpread && growth <= kObstacle2dGrowth,
          fmt("1D p 4..32: %s (spread %d); 2D 4x4 p 4,8,16: %s (growth %.2fx)", join(one).c_str(), spread,
              join(two).c_str(), growth)};
}

Outcome gradient_bench() {
  std::vector<int> its;
  bool conv = true;
  for (int cells : {4, 8, 16})
    for (int p : {2, 4, 8}) {
      const auto r = bench_preconditioner(ConstraintKind::Gradient, 2, cells, p, 1e-5);
      its.push_back(r.iterations);
      conv = conv && r.converged;
    }
  const double spread = double(*std::max_element(its.begin(), its.end())) / *std::min_element(its.begin(), its.end());
  return {conv && spread <= kGradientSpread,
          fmt("1/h 4,8,16 x p 2,4,8: %s (spread %.2fx)", join(its).c_str(), spread)};
}

Outcome oscillatory_reproduction() {
  const auto prob = make_problem(ProblemKind::Obstacle1D);
  const OscillatoryExact ex;
  const Discretization d(uniform_mesh_1d(0, 1, 1000, 4), ConstraintKind::Obstacle);
  LvppOptions o;
  o.beta = prob.beta;
  const LvppSolver solver(d, prob.f, prob.phi, o);
  LvppState st = solver.initial_state();
  const auto rep = solver.solve(prob.schedule, st);
  const FemFunction u = FemFunction::from_u(d, st.u);

  // First point from the left where u reaches the obstacle to within 1e-5.
  double fb = NAN;
  for (int i = 0; i <= 50000; ++i) {
    const double x = 0.05 * i / 50000;
    if (u.value(x) >= 1 - 1e-5) {
      fb = x;
      break;
    }
  }
  // Contact set of the closed-form solution: [x0, x1], [x2, x3] and the touching points in between.
  double plateau = 0, literal = 0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = 0.05 + 0.8 * i / 2000;
    literal = std::max(literal, std::abs(ex.value(x) - 1));
  }
  for (int i = 0; i <= 400; ++i) {
    for (double x : {ex.x0() + (ex.x1() - ex.x0()) * i / 400, ex.x2() + (ex.x3() - ex.x2()) * i / 400})
      plateau = std::max(plateau, std::abs(u.value(x) - 1));
  }
  const bool ok = rep.converged && std::abs(fb - ex.x0()) <= kFreeBoundaryTol && plateau <= kPlateauTol;
  return {ok, fmt("1000 cells p 4: %s, Newton %d; free boundary %.6f vs %.6f; max|u-1| on [x0,x1]u[x2,x3] %.1e "
                  "(the closed form itself is not 1 on all of [0.05,0.85]: max|u*-1| %.2f there)",
                  rep.status.c_str(), rep.newton_total(), fb, ex.x0(), plateau, literal)};
}

std::vector<StudyRow> study(ProblemKind problem, Strategy strategy, int p, int cells, int steps,
                            std::function<void(StudySpec&)> tweak = {}) {
  StudySpec s;
  s.problem = problem;
  s.strategy = strategy;
  s.p = p;
  s.cells = cells;
  s.steps = steps;
  if (tweak) tweak(s);
  return run_study(s);
}

/// Slope of -log(error) against log(dofs) over rows [first, last).
double rate(const std::vector<StudyRow>& rows, std::size_t first, std::size_t last) {
  std::vector<double> x, y;
  for (std::size_t k = first; k < last && k < rows.size(); ++k) {
    x.push_back(rows[k].dofs);
    y.push_back(rows[k].h1_error);
  }
  return -loglog_slope(x, y);
}

bool all_ok(const std::vector<StudyRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const StudyRow& r) { return r.status == "ok"; });
}

Outcome oscillatory_rates() {
  const auto ph = study(ProblemKind::Obstacle1D, Strategy::HUniform, 1, 25, 5);
  const auto pa = study(ProblemKind::Obstacle1D, Strategy::HAdaptive, 1, 25, 8);
  const auto u2 = study(ProblemKind::Obstacle1D, Strategy::HUniform, 2, 10, 7);
  const auto u4 = study(ProblemKind::Obstacle1D, Strategy::HUniform, 4, 10, 7);
  const auto hp = study(ProblemKind::Obstacle1D, Strategy::HPAdaptive, 13, 20, 6);
  const double r_ph = rate(ph, 0, ph.size()), r_pa = rate(pa, 0, pa.size());
  // Local rates of the uniform runs swing with the free boundary's position in its cell; fit all levels.
  const double r_u2 = rate(u2, 0, u2.size()), r_u4 = rate(u4, 0, u4.size());
  const double r_hp = rate(hp, 0, hp.size());
  const bool ok = all_ok(ph) && all_ok(pa) && all_ok(u2) && all_ok(u4) && all_ok(hp) &&
                  std::abs(r_ph - kRateOne) <= kRateOneTol && std::abs(r_pa - kRateOne) <= kRateOneTol &&
                  r_u2 >= kRateUniform && r_u4 >= kRateUniform && r_hp >= kRateHp;
  return {ok, fmt("p=1 h-uniform %.2f, p=1 h-adaptive %.2f, p=2 %.2f, p=4 %.2f (10 to 640 cells), hp-adaptive %.2f "
                  "(6 levels, error %.2e at %d dofs)",
                  r_ph, r_pa, r_u2, r_u4, r_hp, hp.back().h1_error, hp.back().dofs)};
}

Outcome bessel_newton() {
  std::vector<int> n;
  bool ok = true;
  for (auto [cells, p] : {std::pair{10, 3}, std::pair{20, 3}, std::pair{10, 6}}) {
    const auto rows = study(ProblemKind::Obstacle2D, Strategy::HUniform, p, cells, 1);
    n.push_back(rows.back().newton_total);
    ok = ok && all_ok(rows);
  }
  const bool same = std::all_of(n.begin(), n.end(), [&](int v) { return v == n[0]; });
  const bool band = std::all_of(n.begin(), n.end(), [](int v) { return v >= kBessel_lo && v <= kBessel_hi; });
  return {ok && same && band, fmt("(1/10,3) (1/20,3) (1/10,6): %s Newton", join(n).c_str())};
}

Outcome gradient_band_and_order() {
  StudySpec rs;
  rs.problem = ProblemKind::Gradient2D;
  rs.p = kGradientRefP;
  rs.cells = kGradientRefCells;
  const Reference ref = make_reference(rs);
  std::vector<int> newton;
  std::vector<double> orders;
  bool ok = true, order_ok = true;
  std::string errs;
  for (int p : {2, 3}) {
    StudySpec s;
    s.problem = ProblemKind::Gradient2D;
    s.p = p;
    s.cells = 4;
    s.steps = 3;
    const auto rows = run_study(s, ref);
    ok = ok && all_ok(rows);
    for (const auto& r : rows) newton.push_back(r.newton_total);
    std::vector<double> h, e;
    for (const auto& r : rows) {
      h.push_back(r.h_max);
      e.push_back(r.h1_error);
    }
    const double order = loglog_slope(h, e);
    orders.push_back(order);
    order_ok = order_ok && order >= p - kOrderSlack;
    errs += fmt(" p=%d errors %s order %.2f;", p, join(e, "%.2e").c_str(), order);
  }
  const bool band = std::all_of(newton.begin(), newton.end(), [](int v) { return v >= kGradient_lo && v <= kGradient_hi; });
  return {ok && band && order_ok,
          fmt("Newton %s (band %s);%s order %s; reference %dx%d p %d (trust %.1e)", join(newton).c_str(),
              band ? "met" : "missed", errs.c_str(), order_ok ? "met" : "missed",
                  kGradientRefCells, kGradientRefCells, kGradientRefP, ref.trust)};
}

Outcome table1() {
  std::vector<double> g;
  bool ok = true;
  for (int p : {3, 10}) {
    const auto rows = study(ProblemKind::Obstacle2D, Strategy::HUniform, p, 10, 1, [](StudySpec& s) {
      s.beta = 1e-4;
      s.rtol = 1e-5;
    });
    g.push_back(rows.back().gmres_avg);
    ok = ok && all_ok(rows) && rows.back().gmres_avg <= kTable1Gmres;
  }
  return {ok, fmt("h = 1/10, p 3, 10: average GMRES per Newton %s", join(g, "%.2f").c_str())};
}

Outcome thermoforming() {
  const auto data = thermoforming_data();
  bool ok = true;
  std::string s;
  for (int p : {6, 12}) {
    const auto r = thermoform_solve(uniform_mesh_2d(0, 1, 4, p), data).report;
    ok = ok && r.converged && r.fixed_point() == kFixedPoint && r.newton_I_avg() >= kNewtonI_lo &&
         r.newton_I_avg() <= kNewtonI_hi && r.gmres_II_avg() <= kGmresII;
    s += fmt(" p=%d: fixed point %d, Newton I %.2f, GMRES I %.2f, Newton II %.2f, GMRES II %.2f;", p,
             r.fixed_point(), r.newton_I_avg(), r.gmres_I_avg(), r.newton_II_avg(), r.gmres_II_avg());
  }
  return {ok, s.substr(1)};
}

Outcome pdas_baseline() {
  const auto prob = make_problem(ProblemKind::Obstacle1D);
  double excess = -INFINITY;
  std::vector<double> h, err;
  bool ok = true;
  for (int cells : {100, 200, 400, 800}) {
    const Mesh1D mesh = uniform_mesh_1d(0, 1, cells, 1);
    const auto r = pdas_solve(mesh, prob.f, prob.phi);
    ok = ok && r.converged;
    excess = std::max(excess, (r.u.array() - 1.0).maxCoeff());
    h.push_back(1.0 / cells);
    err.push_back(h1_error_1d(pdas_function(mesh, r.u), oscillatory()));
  }
  const double order = loglog_slope(h, err);

  const Mesh1D mesh = uniform_mesh_1d(0, 1, 200, 1);
  const auto r = pdas_solve(mesh, prob.f, prob.phi);
  const Discretization d(mesh.with_degree(2), ConstraintKind::Obstacle);
  LvppOptions o;
  o.beta = prob.beta;
  const LvppSolver solver(d, prob.f, prob.phi, o);
  LvppState st = solver.initial_state();
  ok = ok && solver.solve(prob.schedule, st).converged;
  const FemFunction up = pdas_function(mesh, r.u), uh = FemFunction::from_u(d, st.u);
  const double e1 = h1_error_1d(up, oscillatory()), e2 = h1_error_1d(uh, oscillatory());
  const double dist = h1_distance(up, uh);
  ok = ok && excess <= kFeasibility && std::abs(order - kRateOne) <= kRateOneTol && e2 < e1 && dist <= 1.5 * e1;
  return {ok, fmt("max nodal u - phi %.1e; rate %.3f; 200 cells: PDAS error %.3f, hpG p=2 error %.3f, distance %.3f",
                  excess, order, e1, e2, dist)};
}

Outcome gradient_derivative() {
  const Discretization d(uniform_mesh_2d(0, 1, 2, 3), ConstraintKind::Gradient);
  const auto phi = sample_cells(d, [](double x, double y) { return 1.0 + x + 0.5 * y; });
  const VectorXd psi = random_vec(d.num_psi(), 21, 1.5);
  const VectorXd dir = random_vec(d.num_psi(), 22);
  const VectorXd jd = gradient_terms(d, psi, phi).jacobian.apply(dir);
  std::vector<double> errs, orders;
  for (double eps : {1e-3, 1e-4, 1e-5}) {
    const VectorXd fd =
        (gradient_terms(d, psi + eps * dir, phi).load - gradient_terms(d, psi - eps * dir, phi).load) / (2 * eps);
    errs.push_back((fd - jd).norm());
  }
  bool ok = true;
  for (std::size_t k = 1; k < errs.size(); ++k) {
    orders.push_back(std::log10(errs[k - 1] / errs[k]));
    ok = ok && std::abs(orders.back() - kDerivOrder) <= kDerivOrderTol;
  }
  return {ok, fmt("errors %s, orders %s", join(errs, "%.2e").c_str(), join(orders, "%.3f").c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"basis identities", basis_identities},
      {"diagonal Psi mass", mass_lemma},
      {"reverse Cholesky", reverse_cholesky},
      {"Schur path matches monolithic LU", schur_vs_lu},
      {"obstacle preconditioner robustness", obstacle_bench},
      {"gradient preconditioner robustness", gradient_bench},
      {"oscillatory obstacle: convergence, free boundary, contact set", oscillatory_reproduction},
      {"oscillatory obstacle: convergence rates", oscillatory_rates},
      {"Bessel obstacle: Newton count independent of h and p", bessel_newton},
      {"gradient constraint: Newton band and order", gradient_band_and_order},
      {"Bessel obstacle: GMRES envelope", table1},
      {"thermoforming fixed point", thermoforming},
      {"PDAS baseline", pdas_baseline},
      {"gradient Jacobian directional derivative", gradient_derivative},
  };
  // Optional arguments: criterion numbers to run.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0, k = 0, ran = 0;
  for (const auto& c : criteria) {
    ++k;
    if (!only.empty() && std::find(only.begin(), only.end(), k) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s [%2d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k, c.name, o.detail.c_str(), t);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed ? 1 : 0;
}
