#include "hpg/pdas.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <unsupported/Eigen/KroneckerProduct>

#include "hpg/basis.hpp"

namespace hpg {

namespace {

using Eigen::VectorXd;
using Clock = std::chrono::steady_clock;
using Triplet = Eigen::Triplet<double>;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr int kLoadPoints = 6;

/// Interior P1 stiffness and mass of an interval mesh.
void p1_matrices(const std::vector<double>& x, SpMat& K, SpMat& M) {
  const int n = static_cast<int>(x.size()) - 2;
  if (n < 1) throw std::invalid_argument("pdas: need at least two cells per direction");
  std::vector<Triplet> tk, tm;
  for (int c = 0; c + 1 < static_cast<int>(x.size()); ++c) {
    const double h = x[c + 1] - x[c];
    const int i = c - 1, j = c;
    const double kl[2][2] = {{1 / h, -1 / h}, {-1 / h, 1 / h}};
    const double ml[2][2] = {{h / 3, h / 6}, {h / 6, h / 3}};
    const int idx[2] = {i, j};
    for (int r = 0; r < 2; ++r)
      for (int s = 0; s < 2; ++s)
        if (idx[r] >= 0 && idx[r] < n && idx[s] >= 0 && idx[s] < n) {
          tk.emplace_back(idx[r], idx[s], kl[r][s]);
          tm.emplace_back(idx[r], idx[s], ml[r][s]);
        }
  }
  K.resize(n, n);
  M.resize(n, n);
  K.setFromTriplets(tk.begin(), tk.end());
  M.setFromTriplets(tm.begin(), tm.end());
}

PdasResult pdas_core(const SpMat& A, const VectorXd& F, const VectorXd& phi, const VectorXd& mass,
                     const PdasOptions& o) {
  if (!(o.c > 0)) throw std::invalid_argument("pdas: c must be positive");
  const int n = static_cast<int>(F.size());
  PdasResult r;
  r.u = VectorXd::Zero(n);
  r.lambda = VectorXd::Zero(n);
  r.active.assign(n, false);
  std::vector<std::vector<bool>> history;
  Eigen::SimplicialLLT<SpMat> chol;
  const auto t0 = Clock::now();

  for (int it = 1; it <= o.maxit; ++it) {
    r.iterations = it;
    std::vector<int> inactive;
    VectorXd fixed = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (r.active[i])
        fixed(i) = phi(i);
      else
        inactive.push_back(i);
    }
    const int m = static_cast<int>(inactive.size());
    SpMat P(m, n);
    std::vector<Triplet> tp;
    for (int k = 0; k < m; ++k) tp.emplace_back(k, inactive[k], 1.0);
    P.setFromTriplets(tp.begin(), tp.end());

    r.u = fixed;
    if (m > 0) {
      auto t1 = Clock::now();
      const SpMat Aii = P * A * P.transpose();
      chol.compute(Aii);
      if (chol.info() != Eigen::Success) throw std::runtime_error("pdas: Cholesky factorization failed");
      ++r.factorizations;
      r.t_factor += seconds_since(t1);
      t1 = Clock::now();
      const VectorXd ui = chol.solve(P * (F - A * fixed));
      r.t_solve += seconds_since(t1);
      r.u += P.transpose() * ui;
    }
    const VectorXd res = F - A * r.u;
    std::vector<bool> next(n);
    int count = 0;
    for (int i = 0; i < n; ++i) r.lambda(i) = r.active[i] ? res(i) / mass(i) : 0.0;
    const double eps_lambda = o.tol * r.lambda.lpNorm<Eigen::Infinity>();
    const double eps_u = o.c * o.tol * std::max(1.0, phi.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < n; ++i) {
      next[i] = r.lambda(i) + o.c * (r.u(i) - phi(i)) > (r.active[i] ? eps_lambda : eps_u);
      count += next[i];
    }
    r.active_sizes.push_back(count);
    if (next == r.active) {
      r.converged = true;
      r.status = "ok";
      break;
    }
    for (const auto& h : history)
      if (h == next) {
        r.status = "oscillating active set";
        r.t_total = seconds_since(t0);
        return r;
      }
    history.push_back(r.active);
    r.active = std::move(next);
  }
  if (!r.converged) r.status = "maxit";
  r.t_total = seconds_since(t0);
  return r;
}

}  // namespace

PdasResult pdas_solve(const Mesh1D& mesh, const Field& f, const Field& phi, const PdasOptions& opts) {
  const auto t0 = Clock::now();
  const auto& x = mesh.points();
  SpMat K, M;
  p1_matrices(x, K, M);
  const int n = static_cast<int>(K.rows());
  const auto [t, w] = gauss_legendre(kLoadPoints);
  VectorXd F = VectorXd::Zero(n), ph(n);
  for (int c = 0; c + 1 < static_cast<int>(x.size()); ++c) {
    const double h = x[c + 1] - x[c];
    for (int q = 0; q < kLoadPoints; ++q) {
      const double fx = f((x[c] + x[c + 1]) / 2 + h / 2 * t(q), 0.0) * w(q) * h / 2;
      if (c >= 1) F(c - 1) += fx * (1 - t(q)) / 2;
      if (c < n) F(c) += fx * (1 + t(q)) / 2;
    }
  }
  for (int i = 0; i < n; ++i) ph(i) = phi(x[i + 1], 0.0);
  const VectorXd mass = M * VectorXd::Ones(n);
  const double t_asm = seconds_since(t0);
  PdasResult r = pdas_core(K, F, ph, mass, opts);
  r.t_assembly = t_asm;
  r.t_total += t_asm;
  return r;
}

PdasResult pdas_solve(const TensorMesh2D& mesh, const Field& f, const Field& phi, const PdasOptions& opts) {
  const auto t0 = Clock::now();
  const auto& x = mesh.mesh_x.points();
  const auto& y = mesh.mesh_y.points();
  SpMat Kx, Mx, Ky, My;
  p1_matrices(x, Kx, Mx);
  p1_matrices(y, Ky, My);
  const int nx = static_cast<int>(Kx.rows()), ny = static_cast<int>(Ky.rows());
  const SpMat A = SpMat(Eigen::kroneckerProduct(Kx, My)) + SpMat(Eigen::kroneckerProduct(Mx, Ky));
  const auto [t, w] = gauss_legendre(kLoadPoints);
  VectorXd F = VectorXd::Zero(nx * ny), ph(nx * ny);
  for (int cx = 0; cx + 1 < static_cast<int>(x.size()); ++cx)
    for (int cy = 0; cy + 1 < static_cast<int>(y.size()); ++cy) {
      const double hx = x[cx + 1] - x[cx], hy = y[cy + 1] - y[cy];
      for (int qx = 0; qx < kLoadPoints; ++qx)
        for (int qy = 0; qy < kLoadPoints; ++qy) {
          const double fv = f((x[cx] + x[cx + 1]) / 2 + hx / 2 * t(qx), (y[cy] + y[cy + 1]) / 2 + hy / 2 * t(qy)) *
                            w(qx) * w(qy) * hx * hy / 4;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
              const int i = cx + a - 1, j = cy + b - 1;
              if (i < 0 || i >= nx || j < 0 || j >= ny) continue;
              const double sx = a ? (1 + t(qx)) / 2 : (1 - t(qx)) / 2;
              const double sy = b ? (1 + t(qy)) / 2 : (1 - t(qy)) / 2;
              F(i * ny + j) += fv * sx * sy;
            }
        }
    }
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) ph(i * ny + j) = phi(x[i + 1], y[j + 1]);
  const VectorXd mass = Eigen::kroneckerProduct(VectorXd(Mx * VectorXd::Ones(nx)), VectorXd(My * VectorXd::Ones(ny)));
  const double t_asm = seconds_since(t0);
  PdasResult r = pdas_core(A, F, ph, mass, opts);
  r.t_assembly = t_asm;
  r.t_total += t_asm;
  return r;
}

FemFunction pdas_function(const Mesh1D& mesh, const Eigen::VectorXd& u) {
  const int n = mesh.num_cells() - 1;
  if (u.size() != n) throw std::invalid_argument("pdas_function: size mismatch");
  auto node = [&](int i) { return i <= 0 || i > n ? 0.0 : u(i - 1); };
  std::vector<Eigen::MatrixXd> cells;
  for (int c = 0; c <= n; ++c) {
    Eigen::MatrixXd m(2, 1);
    m << (node(c) + node(c + 1)) / 2, (node(c + 1) - node(c)) / 2;
    cells.push_back(m);
  }
  return FemFunction(mesh.points(), {}, std::move(cells));
}

FemFunction pdas_function(const TensorMesh2D& mesh, const Eigen::VectorXd& u) {
  const int nx = mesh.mesh_x.num_cells() - 1, ny = mesh.mesh_y.num_cells() - 1;
  if (u.size() != nx * ny) throw std::invalid_argument("pdas_function: size mismatch");
  auto node = [&](int i, int j) { return i <= 0 || i > nx || j <= 0 || j > ny ? 0.0 : u((i - 1) * ny + j - 1); };
  std::vector<Eigen::MatrixXd> cells;
  for (int cx = 0; cx <= nx; ++cx)
    for (int cy = 0; cy <= ny; ++cy) {
      const double u00 = node(cx, cy), u10 = node(cx + 1, cy), u01 = node(cx, cy + 1), u11 = node(cx + 1, cy + 1);
      Eigen::MatrixXd m(2, 2);
      m << (u00 + u10 + u01 + u11) / 4, (u01 + u11 - u00 - u10) / 4, (u10 + u11 - u00 - u01) / 4,
          (u00 + u11 - u10 - u01) / 4;
      cells.push_back(m);
    }
  return FemFunction(mesh.mesh_x.points(), mesh.mesh_y.points(), std::move(cells));
}

}  // namespace hpg

namespace hpg {

std::vector<double> pdas_estimate(const Mesh1D& mesh, const Field& f, const PdasResult& r) {
  const auto& x = mesh.points();
  const int cells = mesh.num_cells();
  auto node = [&](const Eigen::VectorXd& v, int i) { return i <= 0 || i >= cells ? 0.0 : v(i - 1); };
  std::vector<double> slope(cells), eta2(cells, 0.0);
  for (int c = 0; c < cells; ++c) slope[c] = (node(r.u, c + 1) - node(r.u, c)) / (x[c + 1] - x[c]);
  const auto [t, w] = gauss_legendre(kLoadPoints);
  for (int c = 0; c < cells; ++c) {
    const double h = x[c + 1] - x[c];
    double res = 0;
    for (int q = 0; q < kLoadPoints; ++q) {
      const double lam = node(r.lambda, c) * (1 - t(q)) / 2 + node(r.lambda, c + 1) * (1 + t(q)) / 2;
      const double v = f((x[c] + x[c + 1]) / 2 + h / 2 * t(q), 0.0) - lam;
      res += w(q) * h / 2 * v * v;
    }
    double jumps = 0;
    if (c > 0) jumps += std::pow(slope[c] - slope[c - 1], 2);
    if (c + 1 < cells) jumps += std::pow(slope[c + 1] - slope[c], 2);
    eta2[c] = h * h * res + h / 2 * jumps;
  }
  return eta2;
}

}  // namespace hpg
