#pragma once

// H^1 errors of piecewise polynomials against closed-form solutions (1D) and against other
// piecewise polynomials such as a reference solution on a finer mesh (1D or 2D).

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "hpg/space.hpp"

namespace hpg {

/// Legendre coefficients of d/dt sum_k a_k P_k(t).
Eigen::VectorXd legendre_derivative(const Eigen::VectorXd& a);

/// Partial derivative (axis 0 = x, 1 = y) as a piecewise polynomial on the same cells.
FemFunction derivative(const FemFunction& f, int axis);

struct ExactSolution1D {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  /// Points where the solution is not smooth; quadrature is split there.
  std::vector<double> breakpoints;
};

/// Full H^1 norm of u - exact with Gauss rules of p_K + extra points on every piece.
double h1_error_1d(const FemFunction& u, const ExactSolution1D& exact, int extra_points = 16);

/// Full H^1 norm of a - b on the common refinement of both meshes.
double h1_distance(const FemFunction& a, const FemFunction& b, int extra_points = 2);

double h1_norm(const FemFunction& a, int extra_points = 2);

}  // namespace hpg
