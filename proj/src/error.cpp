#include "hpg/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<double> merge_breaks(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  const double tol = 1e-14 * std::max(1.0, std::abs(a.back() - a.front()));
  std::vector<double> out;
  for (double t : a)
    if (out.empty() || t - out.back() > tol) out.push_back(t);
  return out;
}

std::pair<int, int> max_degrees(const FemFunction& f) {
  int px = 0, py = 0;
  for (int i = 0; i < f.num_cells_x(); ++i)
    for (int j = 0; j < f.num_cells_y(); ++j) {
      px = std::max(px, static_cast<int>(f.cell_coeffs(i, j).rows()) - 1);
      py = std::max(py, static_cast<int>(f.cell_coeffs(i, j).cols()) - 1);
    }
  return {px, py};
}

struct Rule {
  VectorXd x;
  VectorXd w;
};

Rule mapped_gauss(int n, double a, double b) {
  auto [t, w] = gauss_legendre(n);
  return {(a + b) / 2 + (b - a) / 2 * t.array(), (b - a) / 2 * w};
}

}  // namespace

Eigen::VectorXd legendre_derivative(const Eigen::VectorXd& a) {
  const int n = static_cast<int>(a.size()) - 1;
  if (n <= 0) return VectorXd::Zero(1);
  // P'_{k+1} - P'_{k-1} = (2k + 1) P_k, run from the top down
  VectorXd b = VectorXd::Zero(n);
  for (int k = n - 1; k >= 0; --k) b(k) = (2 * k + 1) * (a(k + 1) + (k + 2 <= n - 1 ? b(k + 2) / (2 * k + 5) : 0.0));
  return b;
}

FemFunction derivative(const FemFunction& f, int axis) {
  if (axis < 0 || axis > 1 || (axis == 1 && f.dim() == 1)) throw std::invalid_argument("derivative: bad axis");
  const auto& xb = f.xbreaks();
  const auto& yb = f.ybreaks();
  std::vector<MatrixXd> cells;
  for (int i = 0; i < f.num_cells_x(); ++i)
    for (int j = 0; j < f.num_cells_y(); ++j) {
      const MatrixXd& c = f.cell_coeffs(i, j);
      MatrixXd d;
      if (axis == 0) {
        d.resize(std::max<Eigen::Index>(c.rows() - 1, 1), c.cols());
        for (Eigen::Index col = 0; col < c.cols(); ++col) d.col(col) = legendre_derivative(c.col(col));
        d *= 2 / (xb[i + 1] - xb[i]);
      } else {
        d.resize(c.rows(), std::max<Eigen::Index>(c.cols() - 1, 1));
        for (Eigen::Index row = 0; row < c.rows(); ++row)
          d.row(row) = legendre_derivative(c.row(row).transpose()).transpose();
        d *= 2 / (yb[j + 1] - yb[j]);
      }
      cells.push_back(std::move(d));
    }
  return FemFunction(xb, f.dim() == 1 ? std::vector<double>{} : yb, std::move(cells));
}

double h1_error_1d(const FemFunction& u, const ExactSolution1D& exact, int extra_points) {
  if (u.dim() != 1) throw std::invalid_argument("h1_error_1d: need a 1D function");
  const auto& xb = u.xbreaks();
  std::vector<double> inner;
  for (double t : exact.breakpoints)
    if (t > xb.front() && t < xb.back()) inner.push_back(t);
  const auto breaks = merge_breaks(xb, inner);
  const FemFunction du = derivative(u, 0);
  double sum = 0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    const int cell = std::min<int>(static_cast<int>(std::upper_bound(xb.begin(), xb.end(), (a + b) / 2) - xb.begin()) - 1,
                                   u.num_cells_x() - 1);
    const int p = static_cast<int>(u.cell_coeffs(cell).rows()) - 1;
    const Rule r = mapped_gauss(p + extra_points, a, b);
    const VectorXd v = u.sample(r.x, VectorXd::Zero(1)).col(0);
    const VectorXd dv = du.sample(r.x, VectorXd::Zero(1)).col(0);
    for (Eigen::Index q = 0; q < r.x.size(); ++q) {
      const double e0 = v(q) - exact.value(r.x(q));
      const double e1 = dv(q) - exact.derivative(r.x(q));
      sum += r.w(q) * (e0 * e0 + e1 * e1);
    }
  }
  return std::sqrt(sum);
}

double h1_distance(const FemFunction& a, const FemFunction& b, int extra_points) {
  if (a.dim() != b.dim()) throw std::invalid_argument("h1_distance: dimension mismatch");
  const bool two_d = a.dim() == 2;
  const auto xs = merge_breaks(a.xbreaks(), b.xbreaks());
  const auto ys = two_d ? merge_breaks(a.ybreaks(), b.ybreaks()) : std::vector<double>{0.0, 1.0};
  const auto [pax, pay] = max_degrees(a);
  const auto [pbx, pby] = max_degrees(b);
  const int nx = std::max(pax, pbx) + 1 + extra_points;
  const int ny = two_d ? std::max(pay, pby) + 1 + extra_points : 1;

  std::vector<FemFunction> da{derivative(a, 0)}, db{derivative(b, 0)};
  if (two_d) {
    da.push_back(derivative(a, 1));
    db.push_back(derivative(b, 1));
  }
  double sum = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const Rule rx = mapped_gauss(nx, xs[i], xs[i + 1]);
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      Rule ry = two_d ? mapped_gauss(ny, ys[j], ys[j + 1]) : Rule{VectorXd::Constant(1, 0.5), VectorXd::Ones(1)};
      const MatrixXd w = rx.w * ry.w.transpose();
      MatrixXd e = a.sample(rx.x, ry.x) - b.sample(rx.x, ry.x);
      sum += (w.array() * e.array().square()).sum();
      for (std::size_t c = 0; c < da.size(); ++c) {
        e = da[c].sample(rx.x, ry.x) - db[c].sample(rx.x, ry.x);
        sum += (w.array() * e.array().square()).sum();
      }
    }
  }
  return std::sqrt(sum);
}

double h1_norm(const FemFunction& a, int extra_points) {
  std::vector<MatrixXd> zero;
  for (int i = 0; i < a.num_cells_x(); ++i)
    for (int j = 0; j < a.num_cells_y(); ++j) zero.push_back(MatrixXd::Zero(1, 1));
  const FemFunction z(a.xbreaks(), a.dim() == 1 ? std::vector<double>{} : a.ybreaks(), std::move(zero));
  return h1_distance(a, z, extra_points);
}

}  // namespace hpg
