#pragma once

// Refinement studies, preconditioner benchmarks and reference solutions behind the command-line
// tool and the acceptance checks.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpg/adaptivity.hpp"
#include "hpg/problems.hpp"

namespace hpg {

enum class Strategy { HUniform, PUniform, HPUniform, HAdaptive, HPAdaptive };

Strategy strategy_from_string(const std::string& name);
std::string to_string(Strategy s);

struct StudySpec {
  ProblemKind problem = ProblemKind::Obstacle1D;
  Strategy strategy = Strategy::HUniform;
  int p = 2;
  int cells = 10;
  int steps = 5;
  /// Degree increment per level for p-uniform and hp-uniform.
  int p_increment = 1;
  std::optional<double> alpha0, alpha_rate, alpha_max, beta;
  /// GMRES relative tolerance inside Newton.
  std::optional<double> rtol;
  std::optional<double> newton_atol;
  std::optional<bool> line_search;  // default: on for adaptive strategies
  /// Default: LU for gradient2d, Schur-complement GMRES otherwise.
  std::optional<LinearSolverKind> linear;
  double sigma = 0.8;
  double delta = 0.7;
  double phi_inf = kDefaultPhiInf;
  unsigned seed = 0;
  /// Reference solution file for problems without a closed-form solution.
  std::string reference;
};

nlohmann::json to_json(const StudySpec& s);
/// Keys mirror the field names (alpha0, alpha_rate, ...); missing keys keep their defaults.
StudySpec study_spec_from_json(const nlohmann::json& j, StudySpec base = {});

/// Solver configuration of one problem after applying the spec's overrides.
ProblemData problem_for(const StudySpec& s);
LvppOptions lvpp_options_for(const StudySpec& s, const ProblemData& prob);

struct StudyRow {
  int level = 0;
  int dofs = 0;
  double h_min = 0.0, h_max = 0.0;
  int p_min = 0, p_max = 0;
  double h1_error = 0.0;
  int newton_total = 0;
  double gmres_avg = 0.0;
  double t_assembly = 0.0;
  double t_linsolve_avg = 0.0;
  double t_total = 0.0;
  std::string status;
};

/// A stored solution: mesh, constraint kind and interior U coefficients.
struct Reference {
  std::string problem;
  ConstraintKind kind = ConstraintKind::Obstacle;
  Mesh1D mesh_x{{0.0, 1.0}, {1}};
  std::optional<Mesh1D> mesh_y;
  Eigen::VectorXd u;
  /// H^1 distance to the solution one level coarser (half the cells), NaN if not computed.
  double trust = 0.0;

  FemFunction function() const;
  nlohmann::json to_json() const;
  static Reference from_json(const nlohmann::json& j);
};

void save_reference(const Reference& r, const std::string& path);
Reference load_reference(const std::string& path);

/// One row per refinement level. p = 1 with obstacle1d runs the PDAS solver.
std::vector<StudyRow> run_study(const StudySpec& spec, const std::optional<Reference>& ref = std::nullopt);
void write_study_csv(const std::vector<StudyRow>& rows, const std::string& path);

/// Solve on the spec's mesh (cells, p) and on the mesh with half the cells for the trust value.
Reference make_reference(const StudySpec& spec);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct BenchRow {
  std::string kind;
  int dim = 1;
  int cells = 1;  // per direction
  int p = 1;
  int iterations = 0;
  bool converged = false;
  double t_factor = 0.0;
};

/// GMRES iterations for S x = 1 with alpha = 1 and D_psi = 0, preconditioned by the block
/// preconditioner of `kind` (obstacle or gradient).
BenchRow bench_preconditioner(ConstraintKind kind, int dim, int cells, int p, double beta, double rtol = 1e-6);
void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path);

/// x,u (1D) or x,y,u (2D) samples on a uniform n (x n) grid.
void write_grid_csv(const FemFunction& f, int n, const std::string& path);

}  // namespace hpg
