#pragma once

// Linear algebra for the Newton saddle-point systems: sparse SPD factorizations, unrestarted
// GMRES, the matrix-free Schur complement S = -(D + E + B^T A_alpha^{-1} B) and the two
// block-diagonal Schur preconditioners.

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "hpg/assembly.hpp"
#include "hpg/space.hpp"

namespace hpg {

using LinearOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// A = L^T L with L lower triangular, obtained by factorizing from the bottom-right corner.
/// For banded 1D hp stiffness matrices with the bubbles last this keeps the factor as sparse as A.
class ReverseCholesky {
 public:
  explicit ReverseCholesky(const SpMat& a);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  /// The factor L (lower triangular), A = L^T L.
  SpMat factor() const;
  Eigen::Index nonzeros() const;
  Eigen::Index rows() const { return n_; }

 private:
  Eigen::Index n_ = 0;
  Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::NaturalOrdering<int>> llt_;
};

/// SPD solver for the stiffness: reverse Cholesky in 1D, AMD-ordered Cholesky otherwise.
class SpdSolver {
 public:
  SpdSolver() = default;
  SpdSolver(const SpMat& a, bool reverse);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::Index rows() const { return n_; }

 private:
  Eigen::Index n_ = 0;
  std::shared_ptr<ReverseCholesky> reverse_;
  std::shared_ptr<Eigen::SimplicialLLT<SpMat>> forward_;
};

enum class PrecondSide { Right, Left };

struct GmresOptions {
  double rtol = 1e-8;
  double atol = 1e-14;
  int maxit = 150;
  PrecondSide side = PrecondSide::Right;
};

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  bool nan = false;
  /// Residual norms, starting with the initial one (preconditioned for left preconditioning).
  std::vector<double> residuals;
};

/// Unrestarted GMRES with modified Gram-Schmidt. An empty preconditioner means identity.
GmresResult gmres(const LinearOp& op, const Eigen::VectorXd& b, const LinearOp& precond = {},
                  const GmresOptions& opts = {});

/// Inverse of a block-diagonal operator, factorized block by block after symmetric diagonal
/// scaling (the exponential weights can span hundreds of orders of magnitude within a cell).
class BlockPreconditioner {
 public:
  BlockPreconditioner() = default;
  explicit BlockPreconditioner(CellBlocks blocks);

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  LinearOp op() const;
  const CellBlocks& blocks() const { return blocks_; }
  SpMat assembled() const { return blocks_.assemble(); }

 private:
  CellBlocks blocks_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
  std::vector<Eigen::VectorXd> scale_;  // symmetric diagonal scaling applied before factorization
};

/// S-hat = -D - E - Bh^T Ah^{-1} Bh per cell, with Ah = alpha * broken Phi stiffness and Bh = (Y_i, P_j).
BlockPreconditioner build_obstacle_preconditioner(const Discretization& d, double alpha, const CellBlocks& D,
                                                  const CellBlocks& E);
/// S-hat = -D - E.
BlockPreconditioner build_gradient_preconditioner(const CellBlocks& D, const CellBlocks& E);

struct SaddleSystem {
  const SpMat* A = nullptr;  // unscaled stiffness on U_0
  const SpdSolver* A_solver = nullptr;
  const SpMat* B = nullptr;
  const CellBlocks* D = nullptr;
  const CellBlocks* E = nullptr;
  double alpha = 1.0;

  /// v -> -(D + E + B^T A_alpha^{-1} B) v.
  Eigen::VectorXd schur_apply(const Eigen::VectorXd& v) const;
  LinearOp schur_op() const;
  /// Assembled G.
  SpMat assemble() const;
};

struct SaddleSolution {
  Eigen::VectorXd du;
  Eigen::VectorXd dpsi;
  int gmres_iterations = 0;
  bool converged = true;
  std::vector<double> residuals;
};

SaddleSolution schur_solve(const SaddleSystem& sys, const Eigen::VectorXd& b_u, const Eigen::VectorXd& b_psi,
                           const BlockPreconditioner& precond, const GmresOptions& opts);
/// Sparse LU of the full saddle-point matrix.
SaddleSolution monolithic_solve(const SaddleSystem& sys, const Eigen::VectorXd& b_u, const Eigen::VectorXd& b_psi);

}  // namespace hpg
