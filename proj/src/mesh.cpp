#include "hpg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpg {

Mesh1D::Mesh1D(std::vector<double> points, std::vector<int> degrees)
    : points_(std::move(points)), degrees_(std::move(degrees)) {
  if (points_.size() < 2) throw std::invalid_argument("Mesh1D: need at least one cell");
  if (degrees_.size() + 1 != points_.size())
    throw std::invalid_argument("Mesh1D: degree count must equal cell count");
  for (double x : points_)
    if (!std::isfinite(x)) throw std::invalid_argument("Mesh1D: non-finite breakpoint");
  for (std::size_t i = 0; i + 1 < points_.size(); ++i)
    if (!(points_[i] < points_[i + 1]))
      throw std::invalid_argument("Mesh1D: breakpoints must be strictly increasing");
  for (int p : degrees_)
    if (p < 1) throw std::invalid_argument("Mesh1D: degrees must be >= 1");
}

double Mesh1D::h_min() const {
  double h = width(0);
  for (int i = 1; i < num_cells(); ++i) h = std::min(h, width(i));
  return h;
}

double Mesh1D::h_max() const {
  double h = width(0);
  for (int i = 1; i < num_cells(); ++i) h = std::max(h, width(i));
  return h;
}

int Mesh1D::p_min() const { return *std::min_element(degrees_.begin(), degrees_.end()); }
int Mesh1D::p_max() const { return *std::max_element(degrees_.begin(), degrees_.end()); }

int Mesh1D::locate(double x) const {
  if (x < a() || x > b()) return -1;
  auto it = std::upper_bound(points_.begin(), points_.end(), x);
  int cell = static_cast<int>(it - points_.begin()) - 1;
  return std::min(cell, num_cells() - 1);
}

Mesh1D Mesh1D::with_degree(int p) const {
  return Mesh1D(points_, std::vector<int>(degrees_.size(), p));
}

Mesh1D uniform_mesh_1d(double a, double b, int cells, int degree) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("uniform_mesh_1d: non-finite bounds");
  if (cells < 1) throw std::invalid_argument("uniform_mesh_1d: need at least one cell");
  if (!(a < b)) throw std::invalid_argument("uniform_mesh_1d: require a < b");
  std::vector<double> pts(cells + 1);
  const double h = (b - a) / cells;
  for (int i = 0; i <= cells; ++i) pts[i] = a + i * h;
  pts.back() = b;
  return Mesh1D(std::move(pts), std::vector<int>(cells, degree));
}

Mesh1D refine_cells(const Mesh1D& mesh, const std::set<int>& marked, const std::set<int>& bump_degree) {
  const int m = mesh.num_cells();
  for (int c : marked)
    if (c < 0 || c >= m) throw std::out_of_range("refine_cells: marked index out of range");
  for (int c : bump_degree)
    if (c < 0 || c >= m) throw std::out_of_range("refine_cells: bump index out of range");

  std::vector<double> pts{mesh.left(0)};
  std::vector<int> deg;
  for (int c = 0; c < m; ++c) {
    if (marked.count(c)) {
      const int p = mesh.degree(c) + (bump_degree.count(c) ? 1 : 0);
      pts.push_back(0.5 * (mesh.left(c) + mesh.right(c)));
      pts.push_back(mesh.right(c));
      deg.push_back(p);
      deg.push_back(p);
    } else {
      pts.push_back(mesh.right(c));
      deg.push_back(mesh.degree(c));
    }
  }
  return Mesh1D(std::move(pts), std::move(deg));
}

TensorMesh2D uniform_mesh_2d(double a, double b, int cells, int degree) {
  auto m = uniform_mesh_1d(a, b, cells, degree);
  return {m, m};
}

TensorMesh2D refine_uniform(const TensorMesh2D& mesh, int degree_increment) {
  auto refine = [&](const Mesh1D& m) {
    std::set<int> all, bump;
    for (int c = 0; c < m.num_cells(); ++c) all.insert(c);
    auto r = refine_cells(m, all, bump);
    std::vector<int> deg = r.degrees();
    for (int& p : deg) p += degree_increment;
    return Mesh1D(r.points(), deg);
  };
  return {refine(mesh.mesh_x), refine(mesh.mesh_y)};
}

nlohmann::json to_json(const Mesh1D& mesh) {
  return {{"points", mesh.points()}, {"degrees", mesh.degrees()}};
}

Mesh1D mesh_from_json(const nlohmann::json& j) {
  return Mesh1D(j.at("points").get<std::vector<double>>(), j.at("degrees").get<std::vector<int>>());
}

}  // namespace hpg
