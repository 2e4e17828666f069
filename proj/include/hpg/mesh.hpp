#pragma once

#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace hpg {

/// Interval mesh a = x_0 < x_1 < ... < x_m = b with one polynomial degree per cell.
class Mesh1D {
 public:
  Mesh1D(std::vector<double> points, std::vector<int> degrees);

  int num_cells() const { return static_cast<int>(degrees_.size()); }
  const std::vector<double>& points() const { return points_; }
  const std::vector<int>& degrees() const { return degrees_; }

  double left(int cell) const { return points_[cell]; }
  double right(int cell) const { return points_[cell + 1]; }
  double width(int cell) const { return points_[cell + 1] - points_[cell]; }
  int degree(int cell) const { return degrees_[cell]; }

  double a() const { return points_.front(); }
  double b() const { return points_.back(); }
  double h_min() const;
  double h_max() const;
  int p_min() const;
  int p_max() const;

  /// Index of the cell containing x; points on an interior breakpoint go to the right cell,
  /// x = b goes to the last cell. Returns -1 outside [a, b].
  int locate(double x) const;

  /// Same mesh with every degree replaced by `p`.
  Mesh1D with_degree(int p) const;

  friend bool operator==(const Mesh1D&, const Mesh1D&) = default;

 private:
  std::vector<double> points_;
  std::vector<int> degrees_;
};

Mesh1D uniform_mesh_1d(double a, double b, int cells, int degree);

/// Bisects every cell in `marked` at its midpoint. Children of cells listed in
/// `bump_degree` get degree p_K + 1; unmarked cells are copied unchanged.
Mesh1D refine_cells(const Mesh1D& mesh, const std::set<int>& marked,
                    const std::set<int>& bump_degree = {});

/// Tensor product of two interval meshes. Cell (i, j) is mesh_x cell i times mesh_y cell j,
/// carrying partial degrees (p_x[i], p_y[j]).
struct TensorMesh2D {
  Mesh1D mesh_x;
  Mesh1D mesh_y;

  int num_cells() const { return mesh_x.num_cells() * mesh_y.num_cells(); }

  friend bool operator==(const TensorMesh2D&, const TensorMesh2D&) = default;
};

TensorMesh2D uniform_mesh_2d(double a, double b, int cells, int degree);

/// Halves every cell in both directions and adds `degree_increment` to all partial degrees.
TensorMesh2D refine_uniform(const TensorMesh2D& mesh, int degree_increment = 0);

nlohmann::json to_json(const Mesh1D& mesh);
Mesh1D mesh_from_json(const nlohmann::json& j);

}  // namespace hpg
