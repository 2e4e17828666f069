#include "hpg/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

namespace hpg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

SpMat reverse_order(const SpMat& a) {
  const Eigen::Index n = a.rows();
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> p(n);
  for (Eigen::Index i = 0; i < n; ++i) p.indices()(i) = static_cast<int>(n - 1 - i);
  SpMat r(n, n);
  r.selfadjointView<Eigen::Lower>() = a.selfadjointView<Eigen::Lower>().twistedBy(p);
  return r;
}

}  // namespace

ReverseCholesky::ReverseCholesky(const SpMat& a) : n_(a.rows()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("ReverseCholesky: matrix must be square");
  llt_.compute(reverse_order(a));
  if (llt_.info() != Eigen::Success) throw std::runtime_error("ReverseCholesky: matrix is not positive definite");
}

Eigen::VectorXd ReverseCholesky::solve(const Eigen::VectorXd& b) const {
  const VectorXd r = llt_.solve(b.reverse());
  return r.reverse();
}

SpMat ReverseCholesky::factor() const {
  // J A J = Lr Lr^T, so A = (J Lr J)(J Lr^T J) = L^T L with L = J Lr^T J.
  const SpMat lr = llt_.matrixL();
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < lr.outerSize(); ++k)
    for (SpMat::InnerIterator it(lr, k); it; ++it)
      t.emplace_back(n_ - 1 - it.col(), n_ - 1 - it.row(), it.value());
  SpMat l(n_, n_);
  l.setFromTriplets(t.begin(), t.end());
  return l;
}

Eigen::Index ReverseCholesky::nonzeros() const { return SpMat(llt_.matrixL()).nonZeros(); }

SpdSolver::SpdSolver(const SpMat& a, bool reverse) : n_(a.rows()) {
  if (reverse) {
    reverse_ = std::make_shared<ReverseCholesky>(a);
  } else {
    forward_ = std::make_shared<Eigen::SimplicialLLT<SpMat>>(a);
    if (forward_->info() != Eigen::Success) throw std::runtime_error("SpdSolver: matrix is not positive definite");
  }
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const {
  if (reverse_) return reverse_->solve(b);
  if (forward_) return forward_->solve(b);
  throw std::logic_error("SpdSolver: not initialized");
}

GmresResult gmres(const LinearOp& op, const Eigen::VectorXd& b, const LinearOp& precond, const GmresOptions& opts) {
  if (!(opts.rtol > 0) || !(opts.atol >= 0)) throw std::invalid_argument("gmres: need rtol > 0 and atol >= 0");
  const Eigen::Index n = b.size();
  const bool left = opts.side == PrecondSide::Left && precond;
  auto M = [&](const VectorXd& v) -> VectorXd { return precond ? precond(v) : v; };

  GmresResult res;
  res.x = VectorXd::Zero(n);
  const VectorXd r0 = left ? M(b) : b;
  const double beta = r0.norm();
  const double target = std::max(opts.rtol * beta, opts.atol);
  res.residuals.push_back(beta);
  if (!std::isfinite(beta)) {
    res.nan = true;
    return res;
  }
  if (beta <= target) {
    res.converged = true;
    return res;
  }

  const int m = std::max(1, static_cast<int>(std::min<Eigen::Index>(opts.maxit, n)));
  MatrixXd V(n, m + 1), Z;
  if (!left && precond) Z.resize(n, m);
  MatrixXd H = MatrixXd::Zero(m + 1, m);
  VectorXd cs = VectorXd::Zero(m), sn = VectorXd::Zero(m), g = VectorXd::Zero(m + 1);
  V.col(0) = r0 / beta;
  g(0) = beta;
  int k = 0;
  for (; k < m; ++k) {
    VectorXd w;
    if (left) {
      w = M(op(V.col(k)));
    } else if (precond) {
      Z.col(k) = M(V.col(k));
      w = op(Z.col(k));
    } else {
      w = op(V.col(k));
    }
    if (!w.allFinite()) {
      res.nan = true;
      break;
    }
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= k; ++i) {
        const double h = V.col(i).dot(w);
        H(i, k) += h;
        w -= h * V.col(i);
      }
    const double hn = w.norm();
    H(k + 1, k) = hn;
    for (int i = 0; i < k; ++i) {
      const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
      H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
      H(i, k) = t;
    }
    const double rho = std::hypot(H(k, k), H(k + 1, k));
    cs(k) = H(k, k) / rho;
    sn(k) = H(k + 1, k) / rho;
    H(k, k) = rho;
    H(k + 1, k) = 0.0;
    g(k + 1) = -sn(k) * g(k);
    g(k) = cs(k) * g(k);
    const double resid = std::abs(g(k + 1));
    res.residuals.push_back(resid);
    const bool happy = hn <= 1e-14 * beta;
    if (resid <= target || happy) {
      res.converged = true;
      ++k;
      break;
    }
    V.col(k + 1) = w / hn;
  }
  res.iterations = k;
  if (k > 0) {
    const VectorXd y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    if (!left && precond)
      res.x = Z.leftCols(k) * y;
    else
      res.x = V.leftCols(k) * y;
  }
  return res;
}

BlockPreconditioner::BlockPreconditioner(CellBlocks blocks) : blocks_(std::move(blocks)) {
  lu_.reserve(blocks_.blocks.size());
  scale_.reserve(blocks_.blocks.size());
  for (std::size_t k = 0; k < blocks_.blocks.size(); ++k) {
    const MatrixXd& b = blocks_.blocks[k];
    if (b.size() == 0) {
      lu_.emplace_back();
      scale_.emplace_back();
      continue;
    }
    VectorXd sc = b.diagonal().cwiseAbs();
    for (Eigen::Index i = 0; i < sc.size(); ++i) sc(i) = sc(i) > 0 && std::isfinite(sc(i)) ? 1 / std::sqrt(sc(i)) : 1.0;
    lu_.emplace_back(sc.asDiagonal() * b * sc.asDiagonal());
    scale_.push_back(std::move(sc));
    const double rc = lu_.back().rcond();
    if (!(rc > 1e-15)) {
      const VectorXd dg = b.diagonal().cwiseAbs();
      throw std::runtime_error("BlockPreconditioner: singular block in cell " + std::to_string(k) +
                               " (rcond " + std::to_string(rc) + ", |diag| " + std::to_string(dg.minCoeff()) + " .. " +
                               std::to_string(dg.maxCoeff()) + ")");
    }
  }
}

Eigen::VectorXd BlockPreconditioner::apply(const Eigen::VectorXd& v) const {
  VectorXd r = VectorXd::Zero(blocks_.size);
  for (std::size_t k = 0; k < lu_.size(); ++k) {
    const auto& dofs = blocks_.dofs[k];
    if (dofs.empty()) continue;
    VectorXd local(dofs.size());
    for (std::size_t i = 0; i < dofs.size(); ++i) local(i) = v(dofs[i]);
    const VectorXd out = scale_[k].cwiseProduct(lu_[k].solve(scale_[k].cwiseProduct(local)));
    for (std::size_t i = 0; i < dofs.size(); ++i) r(dofs[i]) = out(i);
  }
  return r;
}

LinearOp BlockPreconditioner::op() const {
  return [this](const VectorXd& v) { return apply(v); };
}

BlockPreconditioner build_obstacle_preconditioner(const Discretization& d, double alpha, const CellBlocks& D,
                                                  const CellBlocks& E) {
  if (!(alpha > 0)) throw std::invalid_argument("build_obstacle_preconditioner: alpha must be positive");
  if (d.kind() != ConstraintKind::Obstacle) throw std::invalid_argument("build_obstacle_preconditioner: kind");
  CellBlocks s;
  s.size = D.size;
  s.dofs = D.dofs;
  const LegendreSpace1D& px = d.psi_space_x();
  const LegendreSpace1D* py = d.psi_space_y();
  for (const auto& c : d.cells()) {
    const MatrixXd kx = px.phi_stiffness_local(c.ix), mx = px.phi_mass_local(c.ix), gx = px.phi_gram_local(c.ix);
    const MatrixXd ky = py ? py->phi_stiffness_local(c.iy) : MatrixXd::Zero(1, 1);
    const MatrixXd my = py ? py->phi_mass_local(c.iy) : MatrixXd::Ones(1, 1);
    const MatrixXd gy = py ? py->phi_gram_local(c.iy) : MatrixXd::Ones(1, 1);
    const MatrixXd ah = alpha * (Eigen::kroneckerProduct(kx, my).eval() + Eigen::kroneckerProduct(mx, ky).eval());
    const MatrixXd bh = Eigen::kroneckerProduct(gx, gy).eval();
    const Eigen::LLT<MatrixXd> llt(ah);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("build_obstacle_preconditioner: singular block in cell " + std::to_string(c.index));
    s.blocks.push_back(-D.blocks[c.index] - E.blocks[c.index] - bh.transpose() * llt.solve(bh));
  }
  return BlockPreconditioner(std::move(s));
}

BlockPreconditioner build_gradient_preconditioner(const CellBlocks& D, const CellBlocks& E) {
  CellBlocks s;
  s.size = D.size;
  s.dofs = D.dofs;
  for (std::size_t k = 0; k < D.blocks.size(); ++k) s.blocks.push_back(-D.blocks[k] - E.blocks[k]);
  return BlockPreconditioner(std::move(s));
}

Eigen::VectorXd SaddleSystem::schur_apply(const Eigen::VectorXd& v) const {
  const VectorXd t = A_solver->solve(*B * v) / alpha;
  return -(D->apply(v) + E->apply(v) + B->transpose() * t);
}

LinearOp SaddleSystem::schur_op() const {
  return [this](const VectorXd& v) { return schur_apply(v); };
}

SpMat SaddleSystem::assemble() const {
  const Eigen::Index nu = A->rows(), np = B->cols();
  const SpMat c = D->assemble() + E->assemble();
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < A->outerSize(); ++k)
    for (SpMat::InnerIterator it(*A, k); it; ++it) t.emplace_back(it.row(), it.col(), alpha * it.value());
  for (int k = 0; k < B->outerSize(); ++k)
    for (SpMat::InnerIterator it(*B, k); it; ++it) {
      t.emplace_back(it.row(), nu + it.col(), it.value());
      t.emplace_back(nu + it.col(), it.row(), it.value());
    }
  for (int k = 0; k < c.outerSize(); ++k)
    for (SpMat::InnerIterator it(c, k); it; ++it) t.emplace_back(nu + it.row(), nu + it.col(), -it.value());
  SpMat g(nu + np, nu + np);
  g.setFromTriplets(t.begin(), t.end());
  return g;
}

SaddleSolution schur_solve(const SaddleSystem& sys, const Eigen::VectorXd& b_u, const Eigen::VectorXd& b_psi,
                           const BlockPreconditioner& precond, const GmresOptions& opts) {
  SaddleSolution out;
  const VectorXd ainv_bu = sys.A_solver->solve(b_u) / sys.alpha;
  const VectorXd y = b_psi - sys.B->transpose() * ainv_bu;
  const GmresResult g = gmres(sys.schur_op(), y, precond.op(), opts);
  out.dpsi = g.x;
  out.gmres_iterations = g.iterations;
  out.converged = g.converged;
  out.residuals = g.residuals;
  out.du = sys.A_solver->solve(b_u - *sys.B * out.dpsi) / sys.alpha;
  return out;
}

SaddleSolution monolithic_solve(const SaddleSystem& sys, const Eigen::VectorXd& b_u, const Eigen::VectorXd& b_psi) {
  SpMat g = sys.assemble();
  g.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(g);
  if (lu.info() != Eigen::Success) throw std::runtime_error("monolithic_solve: factorization failed");
  VectorXd rhs(b_u.size() + b_psi.size());
  rhs << b_u, b_psi;
  const VectorXd x = lu.solve(rhs);
  SaddleSolution out;
  out.du = x.head(b_u.size());
  out.dpsi = x.tail(b_psi.size());
  out.converged = x.allFinite();
  return out;
}

}  // namespace hpg
