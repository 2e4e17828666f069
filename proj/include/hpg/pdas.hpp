#pragma once

// Primal-dual active set solver for the obstacle problem u <= phi with continuous piecewise
// (bi)linear elements, on 1D meshes and 2D tensor meshes (cell degrees are ignored).

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hpg/mesh.hpp"
#include "hpg/space.hpp"

namespace hpg {

struct PdasOptions {
  double c = 1.0;
  int maxit = 200;
  /// Active-set threshold relative to max|lambda| (active nodes) or c max(1, max|phi|) (inactive
  /// nodes); degenerate nodes with lambda = 0 and u = phi would otherwise flip on roundoff.
  double tol = 1e-10;
};

struct PdasResult {
  /// Interior nodal values; in 2D node (i, j) sits at (i - 1) * (n_y - 1) + (j - 1).
  Eigen::VectorXd u;
  /// Nodal multiplier (f - A u) / lumped mass on the active set, zero elsewhere.
  Eigen::VectorXd lambda;
  std::vector<bool> active;
  int iterations = 0;
  int factorizations = 0;
  bool converged = false;
  std::string status;
  double t_assembly = 0.0;
  double t_factor = 0.0;
  double t_solve = 0.0;
  double t_total = 0.0;
  std::vector<int> active_sizes;

  double t_linsolve_avg() const { return iterations > 0 ? (t_factor + t_solve) / iterations : 0.0; }
};

/// Semismooth iteration from the empty active set: A = {i : lambda_i + c (u_i - phi_i) > 0},
/// u = phi on A, Poisson on the rest; stops when A repeats.
PdasResult pdas_solve(const Mesh1D& mesh, const Field& f, const Field& phi, const PdasOptions& opts = {});
PdasResult pdas_solve(const TensorMesh2D& mesh, const Field& f, const Field& phi, const PdasOptions& opts = {});

/// Piecewise linear function with zero boundary values.
FemFunction pdas_function(const Mesh1D& mesh, const Eigen::VectorXd& u);
FemFunction pdas_function(const TensorMesh2D& mesh, const Eigen::VectorXd& u);

}  // namespace hpg

namespace hpg {

/// Squared P1 residual indicator per cell: h^2 ||f - lambda_h||^2 + h/2 ([u'] at both ends)^2,
/// lambda_h the piecewise linear interpolant of the nodal multiplier.
std::vector<double> pdas_estimate(const Mesh1D& mesh, const Field& f, const PdasResult& r);

}  // namespace hpg
