#include "hpg/assembly.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/SparseExtra>

namespace hpg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Synthesis and truncated analysis operators of one cell.
struct CellOps {
  MatrixXd sx, sy;  // N x (q + 1)
  MatrixXd tx, ty;  // (q + 1) x N
  MatrixXd mass;    // (q_x + 1) x (q_y + 1) Psi mass diagonal

  CellOps(const Cell& c) {
    sx = synthesis_matrix(c.x.q + 1, c.x.grid);
    sy = synthesis_matrix(c.y.q + 1, c.y.grid);
    tx = analysis_matrix(c.x.grid).topRows(c.x.q + 1);
    ty = analysis_matrix(c.y.grid).topRows(c.y.q + 1);
    mass.resize(c.x.q + 1, c.y.q + 1);
    for (int a = 0; a <= c.x.q; ++a)
      for (int b = 0; b <= c.y.q; ++b) mass(a, b) = c.x.width() / (2.0 * a + 1) * c.y.width() / (2.0 * b + 1);
  }

  MatrixXd values(const MatrixXd& coeffs) const { return sx * coeffs * sy.transpose(); }

  // Psi load of a weight grid: (w, zeta_ab).
  MatrixXd load(const MatrixXd& w) const { return (tx * w * ty.transpose()).cwiseProduct(mass); }

  // Block with entries (zeta_ce, w zeta_ab) through the projection quadrature.
  MatrixXd block(const MatrixXd& w) const {
    const int nx = static_cast<int>(sx.cols()), ny = static_cast<int>(sy.cols());
    MatrixXd out(nx * ny, nx * ny);
    for (int a = 0; a < nx; ++a) {
      const MatrixXd xa = tx * sx.col(a).asDiagonal() * w;
      for (int b = 0; b < ny; ++b) {
        const MatrixXd r = (xa * sy.col(b).asDiagonal() * ty.transpose()).cwiseProduct(mass);
        for (int c = 0; c < nx; ++c)
          for (int e = 0; e < ny; ++e) out(c * ny + e, a * ny + b) = r(c, e);
      }
    }
    return out;
  }
};

MatrixXd gather(const VectorXd& v, const std::vector<int>& dofs, int offset, int rows, int cols) {
  MatrixXd m(rows, cols);
  for (int a = 0; a < rows; ++a)
    for (int b = 0; b < cols; ++b) m(a, b) = v(offset + dofs[a * cols + b]);
  return m;
}

void scatter(VectorXd& v, const std::vector<int>& dofs, int offset, const MatrixXd& m) {
  const int cols = static_cast<int>(m.cols());
  for (int a = 0; a < m.rows(); ++a)
    for (int b = 0; b < cols; ++b) v(offset + dofs[a * cols + b]) += m(a, b);
}

}  // namespace

SpMat CellBlocks::assemble() const {
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t k = 0; k < blocks.size(); ++k)
    for (Eigen::Index j = 0; j < blocks[k].cols(); ++j)
      for (Eigen::Index i = 0; i < blocks[k].rows(); ++i)
        if (blocks[k](i, j) != 0.0) t.emplace_back(dofs[k][i], dofs[k][j], blocks[k](i, j));
  SpMat m(size, size);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::VectorXd CellBlocks::apply(const Eigen::VectorXd& v) const {
  VectorXd r = VectorXd::Zero(size);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    VectorXd local(dofs[k].size());
    for (std::size_t i = 0; i < dofs[k].size(); ++i) local(i) = v(dofs[k][i]);
    const VectorXd out = blocks[k] * local;
    for (std::size_t i = 0; i < dofs[k].size(); ++i) r(dofs[k][i]) += out(i);
  }
  return r;
}

SpMat assemble_stiffness(const Discretization& d) { return d.stiffness(true); }
SpMat assemble_gram(const Discretization& d) { return d.gram(); }
Eigen::VectorXd assemble_mass_diag(const Discretization& d) { return d.psi_mass(); }

std::vector<std::vector<int>> cell_dof_lists(const Discretization& d) {
  std::vector<std::vector<int>> lists;
  const int n = d.num_psi_scalar();
  for (const auto& c : d.cells()) {
    const auto scalar = d.cell_psi_dofs(c);
    std::vector<int> all;
    for (int k = 0; k < d.num_components(); ++k)
      for (int i : scalar) all.push_back(k * n + i);
    lists.push_back(std::move(all));
  }
  return lists;
}

Eigen::VectorXi block_permutation(const Discretization& d) {
  Eigen::VectorXi perm(d.num_psi());
  int k = 0;
  for (const auto& list : cell_dof_lists(d))
    for (int i : list) perm(k++) = i;
  return perm;
}

std::vector<Eigen::MatrixXd> sample_cells(const Discretization& d, const Field& f, double inset) {
  std::vector<MatrixXd> out;
  out.reserve(d.num_cells());
  for (const auto& c : d.cells()) out.push_back(d.sample(f, c, inset));
  return out;
}

NonlinearTerms obstacle_terms(const Discretization& d, const Eigen::VectorXd& psi, bool jacobian) {
  if (d.kind() != ConstraintKind::Obstacle) throw std::invalid_argument("obstacle_terms: discretization kind");
  NonlinearTerms out;
  out.load = VectorXd::Zero(d.num_psi());
  out.jacobian.size = d.num_psi();
  for (const auto& c : d.cells()) {
    const CellOps ops(c);
    const auto dofs = d.cell_psi_dofs(c);
    const MatrixXd g = ops.values(gather(psi, dofs, 0, c.x.q + 1, c.y.q + 1));
    MatrixXd w(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      double arg = -g(i);
      if (!std::isfinite(arg) || arg > kExpClamp) {
        out.diverged = true;
        arg = std::isnan(arg) ? 0.0 : std::min(arg, kExpClamp);
      }
      w(i) = std::exp(arg);
    }
    scatter(out.load, dofs, 0, ops.load(w));
    if (!jacobian) continue;
    out.jacobian.dofs.push_back(dofs);
    out.jacobian.blocks.push_back(ops.block(w));
  }
  return out;
}

NonlinearTerms gradient_terms(const Discretization& d, const Eigen::VectorXd& psi,
                              const std::vector<Eigen::MatrixXd>& phi, bool jacobian) {
  if (d.kind() != ConstraintKind::Gradient) throw std::invalid_argument("gradient_terms: discretization kind");
  if (static_cast<int>(phi.size()) != d.num_cells()) throw std::invalid_argument("gradient_terms: phi grid count");
  const int dim = d.num_components();
  const int n = d.num_psi_scalar();
  NonlinearTerms out;
  out.load = VectorXd::Zero(d.num_psi());
  out.jacobian.size = d.num_psi();
  const auto lists = cell_dof_lists(d);
  for (const auto& c : d.cells()) {
    const CellOps ops(c);
    const auto dofs = d.cell_psi_dofs(c);
    const MatrixXd& ph = phi[c.index];
    std::vector<MatrixXd> g;
    for (int k = 0; k < dim; ++k) g.push_back(ops.values(gather(psi, dofs, k * n, c.x.q + 1, c.y.q + 1)));
    MatrixXd s = MatrixXd::Ones(ph.rows(), ph.cols());
    for (int k = 0; k < dim; ++k) s += g[k].cwiseProduct(g[k]);
    if (!s.allFinite()) out.diverged = true;
    const MatrixXd inv = s.cwiseSqrt().cwiseInverse();        // (1 + |psi|^2)^{-1/2}
    const MatrixXd inv3 = inv.cwiseProduct(inv).cwiseProduct(inv);
    const int m = c.num_psi();
    for (int k = 0; k < dim; ++k) scatter(out.load, dofs, k * n, ops.load(ph.cwiseProduct(g[k]).cwiseProduct(inv)));
    if (!jacobian) continue;
    MatrixXd block(dim * m, dim * m);
    for (int k = 0; k < dim; ++k) {
      for (int l = 0; l < dim; ++l) {
        MatrixXd w = -ph.cwiseProduct(g[k]).cwiseProduct(g[l]).cwiseProduct(inv3);
        if (k == l) w += ph.cwiseProduct(inv);
        block.block(k * m, l * m, m, m) = ops.block(w);
      }
    }
    out.jacobian.dofs.push_back(lists[c.index]);
    out.jacobian.blocks.push_back(std::move(block));
  }
  return out;
}

SpMat assemble_D_obstacle(const Discretization& d, const Eigen::VectorXd& psi) {
  return obstacle_terms(d, psi).jacobian.assemble();
}

Eigen::VectorXd apply_D_obstacle(const Discretization& d, const Eigen::VectorXd& psi, const Eigen::VectorXd& v) {
  VectorXd r = VectorXd::Zero(d.num_psi());
  for (const auto& c : d.cells()) {
    const CellOps ops(c);
    const auto dofs = d.cell_psi_dofs(c);
    const MatrixXd g = ops.values(gather(psi, dofs, 0, c.x.q + 1, c.y.q + 1));
    const MatrixXd w = (-g).cwiseMin(kExpClamp).array().exp().matrix();
    const MatrixXd vv = ops.values(gather(v, dofs, 0, c.x.q + 1, c.y.q + 1));
    scatter(r, dofs, 0, ops.load(w.cwiseProduct(vv)));
  }
  return r;
}

SpMat assemble_D_gradient(const Discretization& d, const Eigen::VectorXd& psi, const std::vector<Eigen::MatrixXd>& phi) {
  return gradient_terms(d, psi, phi).jacobian.assemble();
}

Eigen::VectorXd apply_D_gradient(const Discretization& d, const Eigen::VectorXd& psi,
                                 const std::vector<Eigen::MatrixXd>& phi, const Eigen::VectorXd& v) {
  const int dim = d.num_components();
  const int n = d.num_psi_scalar();
  VectorXd r = VectorXd::Zero(d.num_psi());
  for (const auto& c : d.cells()) {
    const CellOps ops(c);
    const auto dofs = d.cell_psi_dofs(c);
    const MatrixXd& ph = phi[c.index];
    std::vector<MatrixXd> g, dv;
    for (int k = 0; k < dim; ++k) {
      g.push_back(ops.values(gather(psi, dofs, k * n, c.x.q + 1, c.y.q + 1)));
      dv.push_back(ops.values(gather(v, dofs, k * n, c.x.q + 1, c.y.q + 1)));
    }
    MatrixXd s = MatrixXd::Ones(ph.rows(), ph.cols());
    MatrixXd dot = MatrixXd::Zero(ph.rows(), ph.cols());
    for (int k = 0; k < dim; ++k) {
      s += g[k].cwiseProduct(g[k]);
      dot += g[k].cwiseProduct(dv[k]);
    }
    const MatrixXd inv = s.cwiseSqrt().cwiseInverse();
    const MatrixXd inv3 = inv.cwiseProduct(inv).cwiseProduct(inv);
    for (int k = 0; k < dim; ++k) {
      const MatrixXd w = ph.cwiseProduct(dv[k].cwiseProduct(inv) - g[k].cwiseProduct(dot).cwiseProduct(inv3));
      scatter(r, dofs, k * n, ops.load(w));
    }
  }
  return r;
}

CellBlocks assemble_E_beta(const Discretization& d, double beta) {
  if (beta < 0.0) throw std::invalid_argument("assemble_E_beta: beta must be non-negative");
  CellBlocks e;
  e.size = d.num_psi();
  e.dofs = cell_dof_lists(d);
  const VectorXd mass = d.psi_mass();
  const LegendreSpace1D& px = d.psi_space_x();
  const LegendreSpace1D* py = d.psi_space_y();
  for (const auto& c : d.cells()) {
    const auto& dofs = e.dofs[c.index];
    const int m = c.num_psi();
    MatrixXd block = MatrixXd::Zero(dofs.size(), dofs.size());
    if (beta == 0.0) {
      e.blocks.push_back(block);
      continue;
    }
    if (d.kind() == ConstraintKind::Obstacle) {
      for (std::size_t i = 0; i < dofs.size(); ++i) block(i, i) = beta * mass(dofs[i]);
    } else {
      const MatrixXd kxl = px.phi_stiffness_local(c.ix);
      MatrixXd local;
      if (!py) {
        local = kxl;
      } else {
        const MatrixXd mxl = px.phi_mass_local(c.ix);
        local = Eigen::kroneckerProduct(kxl, py->phi_mass_local(c.iy)).eval() +
                Eigen::kroneckerProduct(mxl, py->phi_stiffness_local(c.iy)).eval();
      }
      for (int k = 0; k < d.num_components(); ++k) block.block(k * m, k * m, m, m) = beta * local;
    }
    e.blocks.push_back(std::move(block));
  }
  return e;
}

void write_matrix_market(const std::string& path, const SpMat& m) {
  if (!Eigen::saveMarket(m, path)) throw std::runtime_error("write_matrix_market: cannot write " + path);
}

}  // namespace hpg
