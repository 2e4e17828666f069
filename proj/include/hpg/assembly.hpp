#pragma once

// Sparse blocks of the Newton saddle-point system
//
//   [ alpha A      B       ] [du  ]   [b_u  ]
//   [ B^T      -D_psi - E  ] [dpsi] = [b_psi]
//
// A is the U_0 stiffness, B the U_0 x Psi Gram matrix, D_psi the linearization of the
// constraint nonlinearity and E = beta * (regularization). D_psi is computed cell by cell with
// a projection quadrature: the nonlinear weight is sampled on a 2(p+1)-point Chebyshev grid,
// multiplied against the synthesized test function, transformed back to Legendre coefficients
// and truncated to the Psi degree. The result is block diagonal (one block per cell) and in
// general not symmetric.

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hpg/space.hpp"

namespace hpg {

/// Dense per-cell blocks of a block-diagonal Psi operator together with their global indices.
struct CellBlocks {
  int size = 0;
  std::vector<std::vector<int>> dofs;
  std::vector<Eigen::MatrixXd> blocks;

  SpMat assemble() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
};

/// Nonlinear part of the constraint: its Psi load vector and Jacobian blocks.
struct NonlinearTerms {
  Eigen::VectorXd load;
  CellBlocks jacobian;
  bool diverged = false;
};

/// Arguments of the exponential larger than this are clamped (and flag divergence).
inline constexpr double kExpClamp = 700.0;

SpMat assemble_stiffness(const Discretization& d);
SpMat assemble_gram(const Discretization& d);
Eigen::VectorXd assemble_mass_diag(const Discretization& d);

/// Global Psi indices of each cell (all components), the layout used by CellBlocks.
std::vector<std::vector<int>> cell_dof_lists(const Discretization& d);
/// new -> old ordering that makes every per-cell block contiguous.
Eigen::VectorXi block_permutation(const Discretization& d);

/// Cell grids of a field, in the order of d.cells().
std::vector<Eigen::MatrixXd> sample_cells(const Discretization& d, const Field& f, double inset = 0.0);

/// (exp(-psi), zeta_i) and [D_psi]_ij = (zeta_i, exp(-psi) zeta_j).
NonlinearTerms obstacle_terms(const Discretization& d, const Eigen::VectorXd& psi, bool jacobian = true);
/// (phi psi / sqrt(1 + |psi|^2), zeta_i) and its Frechet derivative.
NonlinearTerms gradient_terms(const Discretization& d, const Eigen::VectorXd& psi,
                              const std::vector<Eigen::MatrixXd>& phi, bool jacobian = true);

SpMat assemble_D_obstacle(const Discretization& d, const Eigen::VectorXd& psi);
Eigen::VectorXd apply_D_obstacle(const Discretization& d, const Eigen::VectorXd& psi, const Eigen::VectorXd& v);
SpMat assemble_D_gradient(const Discretization& d, const Eigen::VectorXd& psi, const std::vector<Eigen::MatrixXd>& phi);
Eigen::VectorXd apply_D_gradient(const Discretization& d, const Eigen::VectorXd& psi,
                                 const std::vector<Eigen::MatrixXd>& phi, const Eigen::VectorXd& v);

/// Obstacle: beta times the Psi mass. Gradient: beta times the broken Phi stiffness, with
/// Phi and Psi dofs identified cell by cell and index by index.
CellBlocks assemble_E_beta(const Discretization& d, double beta);

void write_matrix_market(const std::string& path, const SpMat& m);

}  // namespace hpg
