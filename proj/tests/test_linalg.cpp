#include <doctest.h>

#include <cmath>
#include <random>

#include "hpg/assembly.hpp"
#include "hpg/basis.hpp"
#include "hpg/linalg.hpp"

#include <Eigen/Eigenvalues>

using namespace hpg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd random_vec(Eigen::Index n, unsigned seed, double scale = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

SpMat sparse(const MatrixXd& m) { return m.sparseView(); }

// Pieces of a saddle system whose lifetimes outlive SaddleSystem.
struct Fixture {
  Discretization d;
  SpMat A, B;
  SpdSolver solver;
  CellBlocks D, E;
  double alpha;

  Fixture(Discretization disc, double alpha_, double beta, const VectorXd& psi) : d(std::move(disc)), alpha(alpha_) {
    A = assemble_stiffness(d);
    B = assemble_gram(d);
    solver = SpdSolver(A, d.dim() == 1);
    if (d.kind() == ConstraintKind::Obstacle)
      D = obstacle_terms(d, psi).jacobian;
    else
      D = gradient_terms(d, psi, sample_cells(d, [](double, double) { return 1.0; })).jacobian;
    E = assemble_E_beta(d, beta);
  }

  SaddleSystem system() const { return {&A, &solver, &B, &D, &E, alpha}; }
};

}  // namespace

TEST_CASE("reverse cholesky examples") {
  ReverseCholesky id(sparse(MatrixXd::Identity(3, 3)));
  CHECK((MatrixXd(id.factor()) - MatrixXd::Identity(3, 3)).norm() < 1e-15);

  MatrixXd d2 = MatrixXd::Zero(2, 2);
  d2(0, 0) = 4;
  d2(1, 1) = 9;
  ReverseCholesky rc(sparse(d2));
  const MatrixXd l = MatrixXd(rc.factor());
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(1, 1) == doctest::Approx(3.0));

  Discretization d(uniform_mesh_1d(0, 1, 5, 10), ConstraintKind::Obstacle);
  const SpMat a = assemble_stiffness(d);
  ReverseCholesky f(a);
  const SpMat L = f.factor();
  CHECK(L.nonZeros() <= a.nonZeros());
  const MatrixXd rec = MatrixXd(SpMat(L.transpose() * L));
  CHECK((rec - MatrixXd(a)).cwiseAbs().maxCoeff() <= 1e-10 * MatrixXd(a).cwiseAbs().maxCoeff());
  // L is lower triangular.
  for (int k = 0; k < L.outerSize(); ++k)
    for (SpMat::InnerIterator it(L, k); it; ++it) CHECK(it.row() >= it.col());

  const VectorXd x = random_vec(a.rows(), 1);
  const VectorXd ax = a * x;
  CHECK((L.transpose() * (L * x) - ax).norm() <= 1e-10 * ax.norm());
  CHECK((f.solve(ax) - x).norm() <= 1e-9 * x.norm());

  MatrixXd indef = MatrixXd::Identity(2, 2);
  indef(1, 1) = -1;
  CHECK_THROWS(ReverseCholesky(sparse(indef)));
}

TEST_CASE("gmres examples") {
  const VectorXd b = random_vec(6, 2);
  auto id = [](const VectorXd& v) { return v; };
  auto r = gmres(id, b);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK((r.x - b).norm() < 1e-14);

  const VectorXd diag = (VectorXd(3) << 1, 2, 4).finished();
  auto op = [&](const VectorXd& v) -> VectorXd { return diag.cwiseProduct(v); };
  auto inv = [&](const VectorXd& v) -> VectorXd { return v.cwiseQuotient(diag); };
  for (auto side : {PrecondSide::Right, PrecondSide::Left}) {
    GmresOptions o;
    o.side = side;
    auto rp = gmres(op, VectorXd::Ones(3), inv, o);
    CHECK(rp.converged);
    CHECK(rp.iterations == 1);
    CHECK((op(rp.x) - VectorXd::Ones(3)).norm() < 1e-14);
  }

  auto zero = gmres(op, VectorXd::Zero(3));
  CHECK(zero.converged);
  CHECK(zero.iterations == 0);
}

TEST_CASE("gmres on a nonsymmetric matrix, residual monotone") {
  const int n = 60;
  MatrixXd m = MatrixXd::Identity(n, n) * 4;
  const VectorXd noise = random_vec(n * n, 5, 0.3);
  m += Eigen::Map<const MatrixXd>(noise.data(), n, n);
  const VectorXd b = random_vec(n, 6);
  GmresOptions o;
  o.rtol = 1e-10;
  auto r = gmres([&](const VectorXd& v) -> VectorXd { return m * v; }, b, {}, o);
  CHECK(r.converged);
  CHECK((m * r.x - b).norm() <= 1.01e-10 * b.norm());
  for (std::size_t i = 1; i < r.residuals.size(); ++i) CHECK(r.residuals[i] <= r.residuals[i - 1] * (1 + 1e-12));

  o.maxit = 3;
  auto capped = gmres([&](const VectorXd& v) -> VectorXd { return m * v; }, b, {}, o);
  CHECK(!capped.converged);
  CHECK(capped.iterations == 3);
}

TEST_CASE("gmres reports NaN actions") {
  auto bad = [](const VectorXd& v) -> VectorXd { return v * std::nan(""); };
  auto r = gmres(bad, VectorXd::Ones(4));
  CHECK(r.nan);
  CHECK(!r.converged);
}

TEST_CASE("obstacle preconditioner against dense oracle") {
  Fixture f(Discretization(uniform_mesh_1d(0, 1, 1, 6), ConstraintKind::Obstacle), 1.0, 0.0,
            VectorXd::Zero(5));
  const auto pre = build_obstacle_preconditioner(f.d, f.alpha, f.D, f.E);
  const MatrixXd sh = MatrixXd(pre.assembled());
  // Oracle: Phi quantities from Gauss quadrature on the cell.
  const int q = 4;
  auto [x, w] = gauss_legendre<double>(20);
  const double h = 1.0, jac = 2.0 / h;
  MatrixXd ah = MatrixXd::Zero(q + 1, q + 1), bh = MatrixXd::Zero(q + 1, q + 1);
  for (int i = 0; i <= q; ++i)
    for (int j = 0; j <= q; ++j)
      for (int k = 0; k < x.size(); ++k) {
        const auto dp = legendre_deriv_all(q + 2, x(k));
        ah(i, j) += w(k) / jac * (dp(i) - dp(i + 2)) * (dp(j) - dp(j + 2)) * jac * jac;
        bh(i, j) += w(k) / jac * yn_eval(i, x(k)) * legendre_eval(j, x(k));
      }
  const MatrixXd oracle = -MatrixXd(f.D.assemble()) - bh.transpose() * ah.inverse() * bh;
  CHECK((sh - oracle).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(sh.determinant()) > 0);

  Fixture z(Discretization(uniform_mesh_2d(0, 1, 2, 4), ConstraintKind::Obstacle), 1.0, 0.5, VectorXd::Zero(4 * 9));
  CellBlocks zeroD = z.D;
  for (auto& b : zeroD.blocks) b.setZero();
  const MatrixXd s2 = MatrixXd(build_obstacle_preconditioner(z.d, 1.0, zeroD, z.E).assembled());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (s2 + s2.transpose()));
  CHECK(eig.eigenvalues().maxCoeff() < 0);
}

TEST_CASE("obstacle preconditioner: constant iterations in p for fixed h (1D)") {
  std::vector<int> its;
  for (int p : {4, 8, 16, 32}) {
    Discretization d(uniform_mesh_1d(0, 1, 10, p), ConstraintKind::Obstacle);
    Fixture f(d, 1.0, 0.0, VectorXd::Zero(d.num_psi()));
    for (auto& b : f.D.blocks) b.setZero();
    const auto pre = build_obstacle_preconditioner(f.d, 1.0, f.D, f.E);
    const auto sys = f.system();
    GmresOptions o;
    o.rtol = 1e-6;
    auto r = gmres(sys.schur_op(), VectorXd::Ones(d.num_psi()), pre.op(), o);
    CHECK(r.converged);
    its.push_back(r.iterations);
  }
  MESSAGE("1D obstacle preconditioned iterations: " << its[0] << " " << its[1] << " " << its[2] << " " << its[3]);
  CHECK(its.back() <= its.front() + 2);
}

TEST_CASE("gradient preconditioner examples") {
  Discretization d(uniform_mesh_1d(0, 1, 4, 5), ConstraintKind::Gradient);
  Fixture f(d, 1.0, 1e-5, VectorXd::Zero(d.num_psi()));
  const auto pre = build_gradient_preconditioner(f.D, f.E);
  const VectorXd v = random_vec(d.num_psi(), 8);
  const VectorXd back = -(f.D.apply(pre.apply(v)) + f.E.apply(pre.apply(v)));
  CHECK((back - v).norm() < 1e-10 * v.norm());

  Fixture g(d, 1.0, 0.0, VectorXd::Zero(d.num_psi()));
  const auto p0 = build_gradient_preconditioner(g.D, g.E);
  const VectorXd mass = d.psi_mass();
  CHECK((p0.apply(v) + v.cwiseQuotient(mass)).norm() < 1e-12 * v.norm() * mass.cwiseInverse().maxCoeff());
}

TEST_CASE("schur solve matches monolithic LU") {
  SUBCASE("zero right-hand side") {
    Discretization d(uniform_mesh_1d(0, 1, 3, 4), ConstraintKind::Obstacle);
    Fixture f(d, 1.0, 0.0, VectorXd::Zero(d.num_psi()));
    const auto pre = build_obstacle_preconditioner(f.d, 1.0, f.D, f.E);
    auto s = schur_solve(f.system(), VectorXd::Zero(d.num_u0()), VectorXd::Zero(d.num_psi()), pre, {});
    CHECK(s.gmres_iterations == 0);
    CHECK(s.du.norm() == 0.0);
    CHECK(s.dpsi.norm() == 0.0);
  }
  struct Case {
    bool two_d;
    ConstraintKind kind;
    double beta;
  };
  for (const Case& c : {Case{false, ConstraintKind::Obstacle, 0.0}, Case{true, ConstraintKind::Obstacle, 1e-4},
                        Case{false, ConstraintKind::Gradient, 1e-3}, Case{true, ConstraintKind::Gradient, 1e-3}}) {
    Discretization d = c.two_d ? Discretization(uniform_mesh_2d(0, 1, 3, 4), c.kind)
                               : Discretization(uniform_mesh_1d(0, 1, 3, 4), c.kind);
    Fixture f(d, 0.7, c.beta, random_vec(d.num_psi(), 9, 0.5));
    const auto pre = c.kind == ConstraintKind::Obstacle ? build_obstacle_preconditioner(f.d, f.alpha, f.D, f.E)
                                                        : build_gradient_preconditioner(f.D, f.E);
    const VectorXd bu = random_vec(d.num_u0(), 10), bp = random_vec(d.num_psi(), 11);
    GmresOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-15;
    const auto s = schur_solve(f.system(), bu, bp, pre, o);
    const auto m = monolithic_solve(f.system(), bu, bp);
    CHECK(s.converged);
    const double scale = m.du.norm() + m.dpsi.norm();
    CHECK((s.du - m.du).norm() < 1e-8 * scale);
    CHECK((s.dpsi - m.dpsi).norm() < 1e-8 * scale);
  }
}
