// Command-line front end: refinement studies, preconditioner benchmarks, reference solutions
// and the thermoforming table.

#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "hpg/qvi.hpp"
#include "hpg/study.hpp"

using namespace hpg;

namespace {

struct SpecFlags {
  std::string config, problem, strategy, reference, linear;
  int p = 0, cells = 0, steps = 0, p_inc = 0;
  double alpha0 = 0, alpha_rate = 0, alpha_max = 0, beta = 0, rtol = 0, newton_atol = 0, sigma = 0, delta = 0,
         phi_inf = 0;
  unsigned seed = 0;
  bool line_search = false, no_line_search = false;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app) {
    opts["config"] = app->add_option("--config", config, "JSON file with study settings");
    opts["problem"] = app->add_option("--problem", problem,
                                      "obstacle1d-oscillatory | obstacle2d-bessel | gradient2d | thermoforming");
    opts["strategy"] =
        app->add_option("--strategy", strategy, "h-uniform | p-uniform | hp-uniform | h-adaptive | hp-adaptive");
    opts["p"] = app->add_option("--p", p, "initial polynomial degree");
    opts["cells"] = app->add_option("--cells", cells, "initial cells per direction");
    opts["steps"] = app->add_option("--steps", steps, "refinement levels");
    opts["p_inc"] = app->add_option("--p-inc", p_inc, "degree increment per level");
    opts["alpha0"] = app->add_option("--alpha0", alpha0);
    opts["alpha_rate"] = app->add_option("--alpha-rate", alpha_rate);
    opts["alpha_max"] = app->add_option("--alpha-max", alpha_max);
    opts["beta"] = app->add_option("--beta", beta);
    opts["rtol"] = app->add_option("--rtol", rtol, "GMRES relative tolerance");
    opts["newton_atol"] = app->add_option("--newton-atol", newton_atol);
    opts["sigma"] = app->add_option("--sigma", sigma);
    opts["delta"] = app->add_option("--delta", delta);
    opts["phi_inf"] = app->add_option("--phi-inf", phi_inf);
    opts["seed"] = app->add_option("--seed", seed, "recorded in the report; the solvers are deterministic");
    opts["reference"] = app->add_option("--reference", reference, "reference solution JSON");
    opts["linear"] = app->add_option("--linear", linear, "schur | lu")->check(CLI::IsMember({"schur", "lu"}));
    opts["ls"] = app->add_flag("--line-search", line_search);
    opts["no_ls"] = app->add_flag("--no-line-search", no_line_search);
  }

  bool given(const std::string& k) const { return opts.at(k)->count() > 0; }

  StudySpec spec() const {
    StudySpec s;
    if (given("config")) {
      std::ifstream is(config);
      if (!is) throw std::runtime_error("cannot open " + config);
      s = study_spec_from_json(nlohmann::json::parse(is));
    }
    if (given("problem")) s.problem = problem_kind_from_string(problem);
    if (given("strategy")) s.strategy = strategy_from_string(strategy);
    if (given("p")) s.p = p;
    if (given("cells")) s.cells = cells;
    if (given("steps")) s.steps = steps;
    if (given("p_inc")) s.p_increment = p_inc;
    if (given("alpha0")) s.alpha0 = alpha0;
    if (given("alpha_rate")) s.alpha_rate = alpha_rate;
    if (given("alpha_max")) s.alpha_max = alpha_max;
    if (given("beta")) s.beta = beta;
    if (given("rtol")) s.rtol = rtol;
    if (given("newton_atol")) s.newton_atol = newton_atol;
    if (given("sigma")) s.sigma = sigma;
    if (given("delta")) s.delta = delta;
    if (given("phi_inf")) s.phi_inf = phi_inf;
    if (given("seed")) s.seed = seed;
    if (given("reference")) s.reference = reference;
    if (given("linear")) s.linear = linear == "lu" ? LinearSolverKind::LU : LinearSolverKind::Schur;
    if (line_search) s.line_search = true;
    if (no_line_search) s.line_search = false;
    return s;
  }
};

nlohmann::json rows_json(const std::vector<StudyRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"dofs", r.dofs},
                   {"h_min", r.h_min},
                   {"h_max", r.h_max},
                   {"p_min", r.p_min},
                   {"p_max", r.p_max},
                   {"H1_error", std::isfinite(r.h1_error) ? nlohmann::json(r.h1_error) : nlohmann::json(nullptr)},
                   {"newton_total", r.newton_total},
                   {"gmres_avg", r.gmres_avg},
                   {"status", r.status}});
  return arr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hp proximal Galerkin solver for obstacle- and gradient-constrained problems"};
  app.require_subcommand(1);

  SpecFlags study_flags;
  std::string study_out = "study.csv";
  auto* study = app.add_subcommand("study", "refinement study, one CSV row per level");
  study_flags.add(study);
  study->add_option("--out", study_out, "CSV path; a JSON report is written next to it");

  std::string kind = "obstacle", bench_out = "bench.csv";
  int dim = 1;
  std::vector<int> bench_p{4, 8, 16, 32}, bench_cells{10};
  double bench_beta = -1, bench_rtol = 1e-6;
  auto* bench = app.add_subcommand("bench-precond", "GMRES iterations for S x = 1 with alpha = 1, D_psi = 0");
  bench->add_option("--kind", kind)->check(CLI::IsMember({"obstacle", "gradient"}));
  bench->add_option("--dim", dim)->check(CLI::IsMember({1, 2}));
  bench->add_option("--p", bench_p, "degrees")->expected(1, -1)->delimiter(',');
  bench->add_option("--cells", bench_cells, "cells per direction")->expected(1, -1)->delimiter(',');
  bench->add_option("--beta", bench_beta, "default 0 (obstacle), 1e-5 (gradient)");
  bench->add_option("--rtol", bench_rtol);
  bench->add_option("--out", bench_out);

  SpecFlags ref_flags;
  std::string ref_out = "reference.json", ref_grid;
  int grid_n = 200;
  auto* ref = app.add_subcommand("make-ref", "solve on a fine mesh and store the solution");
  ref_flags.add(ref);
  ref->add_option("--out", ref_out);
  ref->add_option("--grid", ref_grid, "also write samples of the solution to this CSV");
  ref->add_option("--grid-n", grid_n);

  std::vector<int> tf_p{6, 12};
  int tf_cells = 4;
  double tf_tol = 3e-3;
  std::string tf_out = "thermoform.csv", tf_grid;
  auto* tf = app.add_subcommand("thermoform", "fixed-point iteration for the thermoforming problem");
  tf->add_option("--p", tf_p)->expected(1, -1)->delimiter(',');
  tf->add_option("--cells", tf_cells);
  tf->add_option("--tol", tf_tol);
  tf->add_option("--out", tf_out);
  tf->add_option("--grid", tf_grid, "write u, mould and T samples of the last run (prefix)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*study) {
      const StudySpec spec = study_flags.spec();
      std::optional<Reference> r;
      if (!spec.reference.empty()) r = load_reference(spec.reference);
      const auto rows = run_study(spec, r);
      write_study_csv(rows, study_out);
      std::ofstream(study_out + ".json") << nlohmann::json{{"spec", to_json(spec)}, {"rows", rows_json(rows)}}.dump(2)
                                          << '\n';
      for (const auto& row : rows)
        std::cout << "dofs " << row.dofs << "  p " << row.p_min << ".." << row.p_max << "  H1 " << row.h1_error
                  << "  newton " << row.newton_total << "  gmres " << row.gmres_avg << "  " << row.status << '\n';
    } else if (*bench) {
      const ConstraintKind k = kind == "obstacle" ? ConstraintKind::Obstacle : ConstraintKind::Gradient;
      const double beta = bench_beta >= 0 ? bench_beta : (k == ConstraintKind::Obstacle ? 0.0 : 1e-5);
      std::vector<BenchRow> rows;
      for (int c : bench_cells)
        for (int p : bench_p) {
          rows.push_back(bench_preconditioner(k, dim, c, p, beta, bench_rtol));
          std::cout << kind << " dim " << dim << " cells " << c << " p " << p << "  its " << rows.back().iterations
                    << '\n';
        }
      write_bench_csv(rows, bench_out);
    } else if (*ref) {
      const Reference r = make_reference(ref_flags.spec());
      save_reference(r, ref_out);
      std::cout << "dofs " << r.u.size() << "  H1 distance to half the cells " << r.trust << '\n';
      if (!ref_grid.empty()) write_grid_csv(r.function(), grid_n, ref_grid);
    } else if (*tf) {
      const ThermoformingData data = thermoforming_data();
      ThermoformOptions o;
      o.tol = tf_tol;
      std::vector<std::pair<int, ThermoformReport>> rows;
      for (int p : tf_p) {
        const TensorMesh2D mesh = uniform_mesh_2d(0, 1, tf_cells, p);
        const ThermoformResult res = thermoform_solve(mesh, data, o);
        const auto& rep = res.report;
        std::cout << "p " << p << "  fixed point " << rep.fixed_point() << "  Newton I " << rep.newton_I_avg()
                  << "  GMRES I " << rep.gmres_I_avg() << "  Newton II " << rep.newton_II_avg() << "  GMRES II "
                  << rep.gmres_II_avg() << "  " << rep.status << '\n';
        rows.emplace_back(p, rep);
        if (!tf_grid.empty() && p == tf_p.back()) {
          const Discretization d(mesh, ConstraintKind::Obstacle);
          write_grid_csv(FemFunction::from_u(d, res.u), 100, tf_grid + "_u.csv");
          write_grid_csv(FemFunction::from_u(d, res.T), 100, tf_grid + "_T.csv");
        }
      }
      write_thermoform_csv(rows, tf_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
