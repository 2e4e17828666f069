#pragma once

// Finite element spaces on 1D and tensor-product 2D meshes:
//   U    continuous hierarchical space: hat functions plus bubbles W_0..W_{p-2} per cell,
//   Psi  discontinuous cellwise Legendre space of degree p - offset,
//   Phi  discontinuous spectral-Galerkin space Y_0..Y_q paired index-by-index with Psi.
// Two-dimensional spaces are Kronecker products of the 1D factors; global index (ix, iy)
// is ix * n_y + iy. A 1D discretization is handled as a tensor product with a unit
// y-factor (one dof, unit mass, zero stiffness, one sample point).

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hpg/basis.hpp"
#include "hpg/mesh.hpp"
#include "hpg/transforms.hpp"

namespace hpg {

using SpMat = Eigen::SparseMatrix<double>;

/// Scalar field f(x, y); one-dimensional problems ignore y.
using Field = std::function<double(double, double)>;

class Space1D {
 public:
  explicit Space1D(Mesh1D mesh);

  const Mesh1D& mesh() const { return mesh_; }
  int num_cells() const { return mesh_.num_cells(); }

  /// Full U: hats 0..m first, then the bubbles of each cell in order.
  int num_u() const { return num_u_; }
  int num_u0() const { return static_cast<int>(interior_.size()); }
  int bubble(int cell, int n) const { return bubble_offset_[cell] + n; }
  int num_bubbles(int cell) const { return mesh_.degree(cell) - 1; }
  /// U dofs touching a cell: left hat, right hat, then W_0..W_{p-2}.
  std::vector<int> cell_u_dofs(int cell) const;
  const std::vector<int>& interior_dofs() const { return interior_; }
  /// num_u0 x num_u selector of the interior (homogeneous Dirichlet) dofs.
  SpMat interior_selector() const;

  /// (p+1) x (p+1) Legendre coefficients of the cell's local U basis, columns ordered as cell_u_dofs.
  Eigen::MatrixXd local_reexpansion(int cell) const;
  /// Same for the physical x-derivative.
  Eigen::MatrixXd local_derivative(int cell) const;

  /// Banded map from U coefficients to cellwise Legendre coefficients of degree p_K.
  SpMat reexpansion() const;
  SpMat stiffness() const;
  SpMat mass() const;

 private:
  Mesh1D mesh_;
  int num_u_ = 0;
  std::vector<int> bubble_offset_;
  std::vector<int> interior_;
};

/// Cellwise Legendre space of degree q_K = p_K - offset on a 1D mesh.
class LegendreSpace1D {
 public:
  LegendreSpace1D(const Mesh1D& mesh, int offset);

  int num_dofs() const { return offsets_.back(); }
  int cell_offset(int cell) const { return offsets_[cell]; }
  int cell_degree(int cell) const { return degrees_[cell]; }
  int offset() const { return offset_; }
  /// Diagonal of the mass matrix: |K| / (2n + 1).
  Eigen::VectorXd mass_diag() const;

  /// (v_i, zeta_j) for v in U (full) and zeta in this space.
  SpMat gram(const Space1D& u) const;
  /// (v_i', zeta_j).
  SpMat gradient_gram(const Space1D& u) const;
  /// Spectral-Galerkin partner space (Y_n on each cell, same index set): block matrices.
  SpMat phi_mass() const;
  SpMat phi_stiffness() const;
  /// (Y_i, zeta_j).
  SpMat phi_gram() const;
  /// Dense cell blocks of the three matrices above.
  Eigen::MatrixXd phi_mass_local(int cell) const;
  Eigen::MatrixXd phi_stiffness_local(int cell) const;
  Eigen::MatrixXd phi_gram_local(int cell) const;

 private:
  SpMat block_diagonal(Eigen::MatrixXd (LegendreSpace1D::*local)(int) const) const;

  Mesh1D mesh_;
  int offset_;
  std::vector<int> degrees_;
  std::vector<int> offsets_;
};

enum class ConstraintKind { Obstacle, Gradient };

/// Per-direction description of one cell.
struct CellFactor {
  double left = 0.0;
  double right = 1.0;
  int p = 0;       // U degree
  int q = 0;       // constraint-space Legendre degree
  int grid = 1;    // Chebyshev sample count
  int psi_offset = 0;   // first global Psi index in this direction
  int proj_offset = 0;  // first global projection-space index in this direction

  double width() const { return right - left; }
};

struct Cell {
  int index = 0;
  int ix = 0;
  int iy = 0;
  CellFactor x;
  CellFactor y;

  int num_psi() const { return (x.q + 1) * (y.q + 1); }
  int num_proj() const { return (x.p + 1) * (y.p + 1); }
};

class Discretization {
 public:
  Discretization(const Mesh1D& mesh, ConstraintKind kind);
  Discretization(const TensorMesh2D& mesh, ConstraintKind kind);

  int dim() const { return y_ ? 2 : 1; }
  ConstraintKind kind() const { return kind_; }
  int psi_offset() const { return kind_ == ConstraintKind::Obstacle ? 2 : 1; }
  int num_components() const { return kind_ == ConstraintKind::Obstacle ? 1 : dim(); }

  const Space1D& space_x() const { return x_; }
  const Space1D* space_y() const { return y_ ? &*y_ : nullptr; }
  const Mesh1D& mesh_x() const { return x_.mesh(); }
  const Mesh1D* mesh_y() const { return y_ ? &y_->mesh() : nullptr; }
  const LegendreSpace1D& psi_space_x() const { return psi_x_; }
  const LegendreSpace1D* psi_space_y() const { return psi_y_ ? &*psi_y_ : nullptr; }

  int num_u() const;
  int num_u0() const;
  int num_psi_scalar() const;
  int num_psi() const { return num_psi_scalar() * num_components(); }
  int num_proj() const;

  const std::vector<Cell>& cells() const { return cells_; }
  int num_cells() const { return static_cast<int>(cells_.size()); }

  /// Global scalar Psi indices of a cell, local order a * (q_y + 1) + b.
  std::vector<int> cell_psi_dofs(const Cell& c) const;
  /// Global projection-space (degree p Legendre) indices of a cell.
  std::vector<int> cell_proj_dofs(const Cell& c) const;

  SpMat stiffness(bool interior = true) const;
  SpMat mass_u(bool interior = true) const;
  /// Gram matrix B between U_0 and Psi (Psi^d for gradient constraints).
  SpMat gram() const;
  /// Diagonal of the Psi mass matrix, repeated per component.
  Eigen::VectorXd psi_mass() const;
  /// Map from U coefficients (full or interior) to the degree-p cellwise Legendre space.
  SpMat reexpansion(bool interior = true) const;
  Eigen::VectorXd proj_mass() const;

  /// Lift interior coefficients to full U coefficients (boundary hats zero).
  Eigen::VectorXd lift(const Eigen::VectorXd& u0) const;

  /// Sample grid of a cell in physical coordinates.
  Eigen::VectorXd grid_x(const Cell& c) const;
  Eigen::VectorXd grid_y(const Cell& c) const;
  /// f sampled on the cell grid (grid_x.size() x grid_y.size()). A positive `inset` moves the
  /// grid endpoints inward by inset * width, so data discontinuous across cell edges is read
  /// from the cell's own side.
  Eigen::MatrixXd sample(const Field& f, const Cell& c, double inset = 0.0) const;

  /// Legendre coefficients of the degree p_K interpolant of f on every cell (projection space).
  Eigen::VectorXd project(const Field& f) const;
  /// Legendre coefficients of the interpolant truncated to the Psi degree.
  Eigen::VectorXd project_psi(const Field& f) const;
  /// Load vector (f, v_i) over U_0 computed from the projection of f.
  Eigen::VectorXd load(const Field& f, bool interior = true) const;
  /// (f, zeta_i) over scalar Psi.
  Eigen::VectorXd psi_load(const Field& f) const;

 private:
  void build_cells();
  SpMat tensor(const SpMat& ax, const SpMat& ay) const;

  ConstraintKind kind_;
  Space1D x_;
  std::optional<Space1D> y_;
  LegendreSpace1D psi_x_;
  std::optional<LegendreSpace1D> psi_y_;
  LegendreSpace1D proj_x_;
  std::optional<LegendreSpace1D> proj_y_;
  std::vector<Cell> cells_;
};

/// Piecewise polynomial represented by Legendre coefficients on each cell of a tensor mesh.
/// Cell (i, j) holds a matrix C with f = sum_ab C(a, b) P_a(y_x) P_b(y_y).
class FemFunction {
 public:
  FemFunction() = default;
  /// Empty `ybreaks` means a 1D function; cells are ordered ix * n_y + iy.
  FemFunction(std::vector<double> xbreaks, std::vector<double> ybreaks, std::vector<Eigen::MatrixXd> cells);

  /// Function in U from full or interior coefficients.
  static FemFunction from_u(const Discretization& d, const Eigen::VectorXd& coeffs);
  /// Component `comp` of a Psi function.
  static FemFunction from_psi(const Discretization& d, const Eigen::VectorXd& coeffs, int comp = 0);
  /// Function in the degree-p projection space.
  static FemFunction from_proj(const Discretization& d, const Eigen::VectorXd& coeffs);

  int dim() const { return one_d_ ? 1 : 2; }
  double value(double x, double y = 0.0) const;
  /// (d/dx, d/dy); the second entry is zero in 1D.
  Eigen::Vector2d gradient(double x, double y = 0.0) const;
  /// Values on a tensor grid lying inside a single cell.
  Eigen::MatrixXd sample(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys) const;
  const Eigen::MatrixXd& cell_coeffs(int ix, int iy = 0) const;
  int num_cells_x() const { return static_cast<int>(xbreaks_.size()) - 1; }
  int num_cells_y() const { return static_cast<int>(ybreaks_.size()) - 1; }
  const std::vector<double>& xbreaks() const { return xbreaks_; }
  const std::vector<double>& ybreaks() const { return ybreaks_; }

  Field as_field() const;

 private:
  int locate(const std::vector<double>& b, double t) const;

  std::vector<double> xbreaks_;
  std::vector<double> ybreaks_;
  std::vector<Eigen::MatrixXd> cells_;
  bool one_d_ = true;
};

/// Legendre coefficients of u restricted to a 1D cell (degree p_K), via the banded re-expansion.
CellExpansion reexpand_u_in_legendre(const Space1D& space, const Eigen::VectorXd& u_full, int cell);

}  // namespace hpg
