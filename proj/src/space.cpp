#include "hpg/space.hpp"

#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace hpg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat from_triplets(int rows, int cols, const Triplets& t) {
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  return m;
}

VectorXd legendre_weights(int n, double h) {
  VectorXd w(n + 1);
  for (int j = 0; j <= n; ++j) w(j) = h / (2.0 * j + 1);
  return w;
}

VectorXd kron_vec(const VectorXd& a, const VectorXd& b) {
  VectorXd r(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) r.segment(i * b.size(), b.size()) = a(i) * b;
  return r;
}

// Legendre coefficients of Y_0..Y_q (columns), rows 0..q+2.
MatrixXd phi_coeffs(int q) {
  MatrixXd c = MatrixXd::Zero(q + 3, q + 1);
  for (int n = 0; n <= q; ++n) {
    c(n, n) = 1.0;
    c(n + 2, n) = -1.0;
  }
  return c;
}

// Physical derivative coefficients of Y_0..Y_q, rows 0..q+1.
MatrixXd phi_deriv_coeffs(int q, double h) {
  MatrixXd c = MatrixXd::Zero(q + 2, q + 1);
  for (int n = 0; n <= q; ++n) c(n + 1, n) = -(2.0 * n + 3) * 2.0 / h;
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Space1D

Space1D::Space1D(Mesh1D mesh) : mesh_(std::move(mesh)) {
  const int m = mesh_.num_cells();
  int next = m + 1;
  bubble_offset_.resize(m);
  for (int c = 0; c < m; ++c) {
    bubble_offset_[c] = next;
    next += mesh_.degree(c) - 1;
  }
  num_u_ = next;
  for (int i = 1; i < m; ++i) interior_.push_back(i);
  for (int i = m + 1; i < num_u_; ++i) interior_.push_back(i);
}

std::vector<int> Space1D::cell_u_dofs(int cell) const {
  std::vector<int> dofs{cell, cell + 1};
  for (int n = 0; n < num_bubbles(cell); ++n) dofs.push_back(bubble(cell, n));
  return dofs;
}

SpMat Space1D::interior_selector() const {
  Triplets t;
  for (int i = 0; i < num_u0(); ++i) t.emplace_back(i, interior_[i], 1.0);
  return from_triplets(num_u0(), num_u_, t);
}

Eigen::MatrixXd Space1D::local_reexpansion(int cell) const {
  const int p = mesh_.degree(cell);
  MatrixXd r = MatrixXd::Zero(p + 1, p + 1);
  r(0, 0) = 0.5;
  r(1, 0) = -0.5;
  r(0, 1) = 0.5;
  r(1, 1) = 0.5;
  // W_n = (P_n - P_{n+2}) / (2n + 3)
  for (int n = 0; n + 2 <= p; ++n) {
    r(n, 2 + n) = 1.0 / (2.0 * n + 3);
    r(n + 2, 2 + n) = -1.0 / (2.0 * n + 3);
  }
  return r;
}

Eigen::MatrixXd Space1D::local_derivative(int cell) const {
  const int p = mesh_.degree(cell);
  const double h = mesh_.width(cell);
  MatrixXd d = MatrixXd::Zero(p + 1, p + 1);
  d(0, 0) = -1.0 / h;
  d(0, 1) = 1.0 / h;
  for (int n = 0; n + 2 <= p; ++n) d(n + 1, 2 + n) = -2.0 / h;
  return d;
}

SpMat Space1D::reexpansion() const {
  Triplets t;
  int row = 0;
  for (int c = 0; c < num_cells(); ++c) {
    const auto dofs = cell_u_dofs(c);
    const MatrixXd r = local_reexpansion(c);
    for (int j = 0; j < r.rows(); ++j)
      for (int a = 0; a < r.cols(); ++a)
        if (r(j, a) != 0.0) t.emplace_back(row + j, dofs[a], r(j, a));
    row += static_cast<int>(r.rows());
  }
  return from_triplets(row, num_u_, t);
}

SpMat Space1D::stiffness() const {
  Triplets t;
  for (int c = 0; c < num_cells(); ++c) {
    const auto dofs = cell_u_dofs(c);
    const MatrixXd d = local_derivative(c);
    const MatrixXd k = d.transpose() * legendre_weights(mesh_.degree(c), mesh_.width(c)).asDiagonal() * d;
    for (int a = 0; a < k.rows(); ++a)
      for (int b = 0; b < k.cols(); ++b)
        if (k(a, b) != 0.0) t.emplace_back(dofs[a], dofs[b], k(a, b));
  }
  return from_triplets(num_u_, num_u_, t);
}

SpMat Space1D::mass() const {
  Triplets t;
  for (int c = 0; c < num_cells(); ++c) {
    const auto dofs = cell_u_dofs(c);
    const MatrixXd r = local_reexpansion(c);
    const MatrixXd m = r.transpose() * legendre_weights(mesh_.degree(c), mesh_.width(c)).asDiagonal() * r;
    for (int a = 0; a < m.rows(); ++a)
      for (int b = 0; b < m.cols(); ++b)
        if (m(a, b) != 0.0) t.emplace_back(dofs[a], dofs[b], m(a, b));
  }
  return from_triplets(num_u_, num_u_, t);
}

// ---------------------------------------------------------------------------------------------
// LegendreSpace1D

LegendreSpace1D::LegendreSpace1D(const Mesh1D& mesh, int offset) : mesh_(mesh), offset_(offset) {
  offsets_.push_back(0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const int q = mesh.degree(c) - offset;
    if (q < 0) throw std::invalid_argument("LegendreSpace1D: cell degree too small for the requested offset");
    degrees_.push_back(q);
    offsets_.push_back(offsets_.back() + q + 1);
  }
}

Eigen::VectorXd LegendreSpace1D::mass_diag() const {
  VectorXd d(num_dofs());
  for (int c = 0; c < mesh_.num_cells(); ++c)
    d.segment(offsets_[c], degrees_[c] + 1) = legendre_weights(degrees_[c], mesh_.width(c));
  return d;
}

SpMat LegendreSpace1D::gram(const Space1D& u) const {
  Triplets t;
  for (int c = 0; c < mesh_.num_cells(); ++c) {
    const auto dofs = u.cell_u_dofs(c);
    const MatrixXd r = u.local_reexpansion(c);
    const VectorXd w = legendre_weights(degrees_[c], mesh_.width(c));
    for (int j = 0; j <= degrees_[c] && j < r.rows(); ++j)
      for (int a = 0; a < r.cols(); ++a)
        if (r(j, a) != 0.0) t.emplace_back(dofs[a], offsets_[c] + j, w(j) * r(j, a));
  }
  return from_triplets(u.num_u(), num_dofs(), t);
}

SpMat LegendreSpace1D::gradient_gram(const Space1D& u) const {
  Triplets t;
  for (int c = 0; c < mesh_.num_cells(); ++c) {
    const auto dofs = u.cell_u_dofs(c);
    const MatrixXd d = u.local_derivative(c);
    const VectorXd w = legendre_weights(degrees_[c], mesh_.width(c));
    for (int j = 0; j <= degrees_[c] && j < d.rows(); ++j)
      for (int a = 0; a < d.cols(); ++a)
        if (d(j, a) != 0.0) t.emplace_back(dofs[a], offsets_[c] + j, w(j) * d(j, a));
  }
  return from_triplets(u.num_u(), num_dofs(), t);
}

Eigen::MatrixXd LegendreSpace1D::phi_mass_local(int cell) const {
  const int q = degrees_[cell];
  const MatrixXd y = phi_coeffs(q);
  return y.transpose() * legendre_weights(q + 2, mesh_.width(cell)).asDiagonal() * y;
}

Eigen::MatrixXd LegendreSpace1D::phi_stiffness_local(int cell) const {
  const int q = degrees_[cell];
  const MatrixXd d = phi_deriv_coeffs(q, mesh_.width(cell));
  return d.transpose() * legendre_weights(q + 1, mesh_.width(cell)).asDiagonal() * d;
}

Eigen::MatrixXd LegendreSpace1D::phi_gram_local(int cell) const {
  const int q = degrees_[cell];
  return phi_coeffs(q).topRows(q + 1).transpose() * legendre_weights(q, mesh_.width(cell)).asDiagonal();
}

SpMat LegendreSpace1D::block_diagonal(MatrixXd (LegendreSpace1D::*local)(int) const) const {
  Triplets t;
  for (int c = 0; c < mesh_.num_cells(); ++c) {
    const MatrixXd m = (this->*local)(c);
    for (int a = 0; a < m.rows(); ++a)
      for (int b = 0; b < m.cols(); ++b)
        if (m(a, b) != 0.0) t.emplace_back(offsets_[c] + a, offsets_[c] + b, m(a, b));
  }
  return from_triplets(num_dofs(), num_dofs(), t);
}

SpMat LegendreSpace1D::phi_mass() const { return block_diagonal(&LegendreSpace1D::phi_mass_local); }
SpMat LegendreSpace1D::phi_stiffness() const { return block_diagonal(&LegendreSpace1D::phi_stiffness_local); }
SpMat LegendreSpace1D::phi_gram() const { return block_diagonal(&LegendreSpace1D::phi_gram_local); }

// ---------------------------------------------------------------------------------------------
// Discretization

Discretization::Discretization(const Mesh1D& mesh, ConstraintKind kind)
    : kind_(kind), x_(mesh), psi_x_(mesh, kind == ConstraintKind::Obstacle ? 2 : 1), proj_x_(mesh, 0) {
  build_cells();
}

Discretization::Discretization(const TensorMesh2D& mesh, ConstraintKind kind)
    : kind_(kind),
      x_(mesh.mesh_x),
      y_(mesh.mesh_y),
      psi_x_(mesh.mesh_x, kind == ConstraintKind::Obstacle ? 2 : 1),
      psi_y_(LegendreSpace1D(mesh.mesh_y, kind == ConstraintKind::Obstacle ? 2 : 1)),
      proj_x_(mesh.mesh_x, 0),
      proj_y_(LegendreSpace1D(mesh.mesh_y, 0)) {
  build_cells();
}

void Discretization::build_cells() {
  auto factor = [](const Mesh1D& m, const LegendreSpace1D& psi, const LegendreSpace1D& proj, int c) {
    CellFactor f;
    f.left = m.left(c);
    f.right = m.right(c);
    f.p = m.degree(c);
    f.q = psi.cell_degree(c);
    f.grid = 2 * (f.p + 1);
    f.psi_offset = psi.cell_offset(c);
    f.proj_offset = proj.cell_offset(c);
    return f;
  };
  const int mx = x_.num_cells();
  const int my = y_ ? y_->num_cells() : 1;
  cells_.clear();
  for (int ix = 0; ix < mx; ++ix)
    for (int iy = 0; iy < my; ++iy) {
      Cell c;
      c.index = ix * my + iy;
      c.ix = ix;
      c.iy = iy;
      c.x = factor(x_.mesh(), psi_x_, proj_x_, ix);
      if (y_) c.y = factor(y_->mesh(), *psi_y_, *proj_y_, iy);
      cells_.push_back(c);
    }
}

int Discretization::num_u() const { return x_.num_u() * (y_ ? y_->num_u() : 1); }
int Discretization::num_u0() const { return x_.num_u0() * (y_ ? y_->num_u0() : 1); }
int Discretization::num_psi_scalar() const { return psi_x_.num_dofs() * (psi_y_ ? psi_y_->num_dofs() : 1); }
int Discretization::num_proj() const { return proj_x_.num_dofs() * (proj_y_ ? proj_y_->num_dofs() : 1); }

std::vector<int> Discretization::cell_psi_dofs(const Cell& c) const {
  const int ny = psi_y_ ? psi_y_->num_dofs() : 1;
  std::vector<int> dofs;
  dofs.reserve(c.num_psi());
  for (int a = 0; a <= c.x.q; ++a)
    for (int b = 0; b <= c.y.q; ++b) dofs.push_back((c.x.psi_offset + a) * ny + c.y.psi_offset + b);
  return dofs;
}

std::vector<int> Discretization::cell_proj_dofs(const Cell& c) const {
  const int ny = proj_y_ ? proj_y_->num_dofs() : 1;
  std::vector<int> dofs;
  dofs.reserve(c.num_proj());
  for (int a = 0; a <= c.x.p; ++a)
    for (int b = 0; b <= c.y.p; ++b) dofs.push_back((c.x.proj_offset + a) * ny + c.y.proj_offset + b);
  return dofs;
}

SpMat Discretization::tensor(const SpMat& ax, const SpMat& ay) const {
  if (!y_) return ax;
  SpMat r = Eigen::kroneckerProduct(ax, ay).eval();
  r.prune(0.0);
  return r;
}

SpMat Discretization::stiffness(bool interior) const {
  auto restrict = [interior](const Space1D& s, const SpMat& m) -> SpMat {
    if (!interior) return m;
    const SpMat p = s.interior_selector();
    return SpMat(p * m * p.transpose());
  };
  const SpMat ax = restrict(x_, x_.stiffness());
  if (!y_) return ax;
  const SpMat mx = restrict(x_, x_.mass());
  const SpMat ay = restrict(*y_, y_->stiffness());
  const SpMat my = restrict(*y_, y_->mass());
  return SpMat(tensor(ax, my) + tensor(mx, ay));
}

SpMat Discretization::mass_u(bool interior) const {
  auto restrict = [interior](const Space1D& s, const SpMat& m) -> SpMat {
    if (!interior) return m;
    const SpMat p = s.interior_selector();
    return SpMat(p * m * p.transpose());
  };
  const SpMat mx = restrict(x_, x_.mass());
  return y_ ? tensor(mx, restrict(*y_, y_->mass())) : mx;
}

SpMat Discretization::gram() const {
  const SpMat px = x_.interior_selector();
  const SpMat bx = px * psi_x_.gram(x_);
  if (kind_ == ConstraintKind::Obstacle) {
    if (!y_) return bx;
    const SpMat by = y_->interior_selector() * psi_y_->gram(*y_);
    return tensor(bx, by);
  }
  const SpMat gx = px * psi_x_.gradient_gram(x_);
  if (!y_) return gx;
  const SpMat py = y_->interior_selector();
  const SpMat by = py * psi_y_->gram(*y_);
  const SpMat gy = py * psi_y_->gradient_gram(*y_);
  const SpMat c0 = tensor(gx, by);
  const SpMat c1 = tensor(bx, gy);
  Triplets t;
  for (int k = 0; k < c0.outerSize(); ++k)
    for (SpMat::InnerIterator it(c0, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < c1.outerSize(); ++k)
    for (SpMat::InnerIterator it(c1, k); it; ++it) t.emplace_back(it.row(), it.col() + c0.cols(), it.value());
  return from_triplets(static_cast<int>(c0.rows()), static_cast<int>(c0.cols() + c1.cols()), t);
}

Eigen::VectorXd Discretization::psi_mass() const {
  VectorXd scalar = psi_y_ ? kron_vec(psi_x_.mass_diag(), psi_y_->mass_diag()) : psi_x_.mass_diag();
  VectorXd r(scalar.size() * num_components());
  for (int k = 0; k < num_components(); ++k) r.segment(k * scalar.size(), scalar.size()) = scalar;
  return r;
}

SpMat Discretization::reexpansion(bool interior) const {
  SpMat rx = x_.reexpansion();
  if (interior) rx = rx * x_.interior_selector().transpose();
  if (!y_) return rx;
  SpMat ry = y_->reexpansion();
  if (interior) ry = ry * y_->interior_selector().transpose();
  return tensor(rx, ry);
}

Eigen::VectorXd Discretization::proj_mass() const {
  return proj_y_ ? kron_vec(proj_x_.mass_diag(), proj_y_->mass_diag()) : proj_x_.mass_diag();
}

Eigen::VectorXd Discretization::lift(const Eigen::VectorXd& u0) const {
  SpMat p = x_.interior_selector();
  if (y_) p = tensor(p, y_->interior_selector());
  return p.transpose() * u0;
}

Eigen::VectorXd Discretization::grid_x(const Cell& c) const {
  const AffineMap<double> map{c.x.left, c.x.right};
  VectorXd g = chebyshev_points(c.x.grid);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = map.to_physical(g(i));
  return g;
}

Eigen::VectorXd Discretization::grid_y(const Cell& c) const {
  if (!y_) return VectorXd::Zero(1);
  const AffineMap<double> map{c.y.left, c.y.right};
  VectorXd g = chebyshev_points(c.y.grid);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = map.to_physical(g(i));
  return g;
}

Eigen::MatrixXd Discretization::sample(const Field& f, const Cell& c, double inset) const {
  VectorXd gx = grid_x(c), gy = grid_y(c);
  if (inset > 0) {
    const double mx = 0.5 * (c.x.left + c.x.right), my = 0.5 * (c.y.left + c.y.right);
    gx = (gx.array() - mx) * (1 - 2 * inset) + mx;
    if (y_) gy = (gy.array() - my) * (1 - 2 * inset) + my;
  }
  MatrixXd v(gx.size(), gy.size());
  for (Eigen::Index i = 0; i < gx.size(); ++i)
    for (Eigen::Index j = 0; j < gy.size(); ++j) v(i, j) = f(gx(i), gy(j));
  return v;
}

Eigen::VectorXd Discretization::project(const Field& f) const {
  VectorXd r(num_proj());
  for (const auto& c : cells_) {
    const MatrixXd v = sample(f, c);
    const MatrixXd tx = analysis_matrix(c.x.grid).topRows(c.x.p + 1);
    const MatrixXd ty = analysis_matrix(c.y.grid).topRows(c.y.p + 1);
    const MatrixXd coeffs = tx * v * ty.transpose();
    const auto dofs = cell_proj_dofs(c);
    for (int a = 0; a <= c.x.p; ++a)
      for (int b = 0; b <= c.y.p; ++b) r(dofs[a * (c.y.p + 1) + b]) = coeffs(a, b);
  }
  return r;
}

Eigen::VectorXd Discretization::project_psi(const Field& f) const {
  VectorXd r(num_psi_scalar());
  for (const auto& c : cells_) {
    const MatrixXd v = sample(f, c);
    const MatrixXd tx = analysis_matrix(c.x.grid).topRows(c.x.q + 1);
    const MatrixXd ty = analysis_matrix(c.y.grid).topRows(c.y.q + 1);
    const MatrixXd coeffs = tx * v * ty.transpose();
    const auto dofs = cell_psi_dofs(c);
    for (int a = 0; a <= c.x.q; ++a)
      for (int b = 0; b <= c.y.q; ++b) r(dofs[a * (c.y.q + 1) + b]) = coeffs(a, b);
  }
  return r;
}

Eigen::VectorXd Discretization::load(const Field& f, bool interior) const {
  const VectorXd w = proj_mass().cwiseProduct(project(f));
  return reexpansion(interior).transpose() * w;
}

Eigen::VectorXd Discretization::psi_load(const Field& f) const {
  const VectorXd m = psi_mass().head(num_psi_scalar());
  return m.cwiseProduct(project_psi(f));
}

// ---------------------------------------------------------------------------------------------
// FemFunction

FemFunction::FemFunction(std::vector<double> xbreaks, std::vector<double> ybreaks, std::vector<Eigen::MatrixXd> cells)
    : xbreaks_(std::move(xbreaks)), ybreaks_(std::move(ybreaks)), cells_(std::move(cells)) {
  one_d_ = ybreaks_.empty();
  if (one_d_) ybreaks_ = {0.0, 1.0};
  if (static_cast<int>(cells_.size()) != num_cells_x() * num_cells_y())
    throw std::invalid_argument("FemFunction: cell count mismatch");
}

FemFunction FemFunction::from_proj(const Discretization& d, const Eigen::VectorXd& coeffs) {
  std::vector<MatrixXd> cells;
  for (const auto& c : d.cells()) {
    const auto dofs = d.cell_proj_dofs(c);
    MatrixXd m(c.x.p + 1, c.y.p + 1);
    for (int a = 0; a <= c.x.p; ++a)
      for (int b = 0; b <= c.y.p; ++b) m(a, b) = coeffs(dofs[a * (c.y.p + 1) + b]);
    cells.push_back(std::move(m));
  }
  return FemFunction(d.mesh_x().points(), d.mesh_y() ? d.mesh_y()->points() : std::vector<double>{}, std::move(cells));
}

FemFunction FemFunction::from_u(const Discretization& d, const Eigen::VectorXd& coeffs) {
  VectorXd full;
  if (coeffs.size() == d.num_u())
    full = coeffs;
  else if (coeffs.size() == d.num_u0())
    full = d.lift(coeffs);
  else
    throw std::invalid_argument("FemFunction::from_u: coefficient length matches neither U nor U_0");
  return from_proj(d, d.reexpansion(false) * full);
}

FemFunction FemFunction::from_psi(const Discretization& d, const Eigen::VectorXd& coeffs, int comp) {
  const int n = d.num_psi_scalar();
  if (coeffs.size() < (comp + 1) * n) throw std::invalid_argument("FemFunction::from_psi: coefficient length");
  std::vector<MatrixXd> cells;
  for (const auto& c : d.cells()) {
    const auto dofs = d.cell_psi_dofs(c);
    MatrixXd m(c.x.q + 1, c.y.q + 1);
    for (int a = 0; a <= c.x.q; ++a)
      for (int b = 0; b <= c.y.q; ++b) m(a, b) = coeffs(comp * n + dofs[a * (c.y.q + 1) + b]);
    cells.push_back(std::move(m));
  }
  return FemFunction(d.mesh_x().points(), d.mesh_y() ? d.mesh_y()->points() : std::vector<double>{}, std::move(cells));
}

int FemFunction::locate(const std::vector<double>& b, double t) const {
  auto it = std::upper_bound(b.begin(), b.end(), t);
  int c = static_cast<int>(it - b.begin()) - 1;
  return std::clamp(c, 0, static_cast<int>(b.size()) - 2);
}

const Eigen::MatrixXd& FemFunction::cell_coeffs(int ix, int iy) const { return cells_[ix * num_cells_y() + iy]; }

double FemFunction::value(double x, double y) const {
  const int ix = locate(xbreaks_, x);
  const int iy = one_d_ ? 0 : locate(ybreaks_, y);
  const MatrixXd& c = cell_coeffs(ix, iy);
  const double rx = AffineMap<double>{xbreaks_[ix], xbreaks_[ix + 1]}.to_reference(x);
  const VectorXd px = legendre_all(static_cast<int>(c.rows()) - 1, std::clamp(rx, -1.0, 1.0));
  if (one_d_) return px.dot(c.col(0));
  const double ry = AffineMap<double>{ybreaks_[iy], ybreaks_[iy + 1]}.to_reference(y);
  const VectorXd py = legendre_all(static_cast<int>(c.cols()) - 1, std::clamp(ry, -1.0, 1.0));
  return px.dot(c * py);
}

Eigen::Vector2d FemFunction::gradient(double x, double y) const {
  const int ix = locate(xbreaks_, x);
  const int iy = one_d_ ? 0 : locate(ybreaks_, y);
  const MatrixXd& c = cell_coeffs(ix, iy);
  const AffineMap<double> mx{xbreaks_[ix], xbreaks_[ix + 1]};
  const double rx = std::clamp(mx.to_reference(x), -1.0, 1.0);
  const VectorXd px = legendre_all(static_cast<int>(c.rows()) - 1, rx);
  const VectorXd dpx = legendre_deriv_all(static_cast<int>(c.rows()) - 1, rx) * mx.jacobian();
  if (one_d_) return {dpx.dot(c.col(0)), 0.0};
  const AffineMap<double> my{ybreaks_[iy], ybreaks_[iy + 1]};
  const double ry = std::clamp(my.to_reference(y), -1.0, 1.0);
  const VectorXd py = legendre_all(static_cast<int>(c.cols()) - 1, ry);
  const VectorXd dpy = legendre_deriv_all(static_cast<int>(c.cols()) - 1, ry) * my.jacobian();
  return {dpx.dot(c * py), px.dot(c * dpy)};
}

Eigen::MatrixXd FemFunction::sample(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys) const {
  const int ix = locate(xbreaks_, xs.mean());
  const int iy = one_d_ ? 0 : locate(ybreaks_, ys.mean());
  const MatrixXd& c = cell_coeffs(ix, iy);
  const AffineMap<double> mx{xbreaks_[ix], xbreaks_[ix + 1]};
  MatrixXd vx(xs.size(), c.rows());
  for (Eigen::Index i = 0; i < xs.size(); ++i)
    vx.row(i) = legendre_all(static_cast<int>(c.rows()) - 1, std::clamp(mx.to_reference(xs(i)), -1.0, 1.0)).transpose();
  if (one_d_) return vx * c;
  const AffineMap<double> my{ybreaks_[iy], ybreaks_[iy + 1]};
  MatrixXd vy(ys.size(), c.cols());
  for (Eigen::Index j = 0; j < ys.size(); ++j)
    vy.row(j) = legendre_all(static_cast<int>(c.cols()) - 1, std::clamp(my.to_reference(ys(j)), -1.0, 1.0)).transpose();
  return vx * c * vy.transpose();
}

Field FemFunction::as_field() const {
  return [self = *this](double x, double y) { return self.value(x, y); };
}

CellExpansion reexpand_u_in_legendre(const Space1D& space, const Eigen::VectorXd& u_full, int cell) {
  const auto dofs = space.cell_u_dofs(cell);
  VectorXd local(dofs.size());
  for (std::size_t a = 0; a < dofs.size(); ++a) local(a) = u_full(dofs[a]);
  return {cell, space.local_reexpansion(cell) * local};
}

}  // namespace hpg
