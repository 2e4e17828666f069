#include "hpg/study.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "hpg/pdas.hpp"

namespace hpg {

namespace {

using Eigen::VectorXd;
using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ExactSolution1D oscillatory_exact() {
  const OscillatoryExact ex;
  return {[ex](double x) { return ex.value(x); }, [ex](double x) { return ex.derivative(x); }, ex.breakpoints()};
}

bool adaptive(Strategy s) { return s == Strategy::HAdaptive || s == Strategy::HPAdaptive; }

TensorMesh2D with_degree(const TensorMesh2D& m, int p) { return {m.mesh_x.with_degree(p), m.mesh_y.with_degree(p)}; }

Mesh1D refine_all(const Mesh1D& m) {
  std::set<int> all;
  for (int k = 0; k < m.num_cells(); ++k) all.insert(k);
  return refine_cells(m, all);
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

template <typename T>
void write_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

Strategy strategy_from_string(const std::string& name) {
  if (name == "h-uniform") return Strategy::HUniform;
  if (name == "p-uniform") return Strategy::PUniform;
  if (name == "hp-uniform") return Strategy::HPUniform;
  if (name == "h-adaptive") return Strategy::HAdaptive;
  if (name == "hp-adaptive") return Strategy::HPAdaptive;
  throw std::invalid_argument("unknown strategy: " + name);
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::HUniform: return "h-uniform";
    case Strategy::PUniform: return "p-uniform";
    case Strategy::HPUniform: return "hp-uniform";
    case Strategy::HAdaptive: return "h-adaptive";
    case Strategy::HPAdaptive: return "hp-adaptive";
  }
  return "";
}

json to_json(const StudySpec& s) {
  json j{{"problem", to_string(s.problem)},
         {"strategy", to_string(s.strategy)},
         {"p", s.p},
         {"cells", s.cells},
         {"steps", s.steps},
         {"p_increment", s.p_increment},
         {"sigma", s.sigma},
         {"delta", s.delta},
         {"phi_inf", s.phi_inf},
         {"seed", s.seed},
         {"reference", s.reference}};
  write_opt(j, "alpha0", s.alpha0);
  write_opt(j, "alpha_rate", s.alpha_rate);
  write_opt(j, "alpha_max", s.alpha_max);
  write_opt(j, "beta", s.beta);
  write_opt(j, "rtol", s.rtol);
  write_opt(j, "newton_atol", s.newton_atol);
  write_opt(j, "line_search", s.line_search);
  if (s.linear) j["linear"] = *s.linear == LinearSolverKind::LU ? "lu" : "schur";
  return j;
}

StudySpec study_spec_from_json(const json& j, StudySpec s) {
  if (j.contains("problem")) s.problem = problem_kind_from_string(j["problem"]);
  if (j.contains("strategy")) s.strategy = strategy_from_string(j["strategy"]);
  if (j.contains("linear")) {
    const std::string l = j["linear"];
    if (l != "lu" && l != "schur") throw std::invalid_argument("linear must be lu or schur");
    s.linear = l == "lu" ? LinearSolverKind::LU : LinearSolverKind::Schur;
  }
  s.p = j.value("p", s.p);
  s.cells = j.value("cells", s.cells);
  s.steps = j.value("steps", s.steps);
  s.p_increment = j.value("p_increment", s.p_increment);
  s.sigma = j.value("sigma", s.sigma);
  s.delta = j.value("delta", s.delta);
  s.phi_inf = j.value("phi_inf", s.phi_inf);
  s.seed = j.value("seed", s.seed);
  s.reference = j.value("reference", s.reference);
  read_opt(j, "alpha0", s.alpha0);
  read_opt(j, "alpha_rate", s.alpha_rate);
  read_opt(j, "alpha_max", s.alpha_max);
  read_opt(j, "beta", s.beta);
  read_opt(j, "rtol", s.rtol);
  read_opt(j, "newton_atol", s.newton_atol);
  read_opt(j, "line_search", s.line_search);
  return s;
}

ProblemData problem_for(const StudySpec& s) {
  ProblemData prob = make_problem(s.problem, s.phi_inf);
  if (s.alpha0) prob.schedule.alpha0 = *s.alpha0;
  if (s.alpha_rate) prob.schedule.rate = *s.alpha_rate;
  if (s.alpha_max) prob.schedule.alpha_max = *s.alpha_max;
  if (s.beta) prob.beta = *s.beta;
  if (s.newton_atol) prob.newton_atol = *s.newton_atol;
  return prob;
}

LvppOptions lvpp_options_for(const StudySpec& s, const ProblemData& prob) {
  LvppOptions o;
  o.beta = prob.beta;
  o.newton.atol = prob.newton_atol;
  o.newton.linear = s.linear.value_or(s.problem == ProblemKind::Gradient2D ? LinearSolverKind::LU : LinearSolverKind::Schur);
  o.newton.line_search = s.line_search.value_or(adaptive(s.strategy));
  if (s.rtol) o.newton.gmres.rtol = *s.rtol;
  return o;
}

FemFunction Reference::function() const {
  const Discretization d = mesh_y ? Discretization(TensorMesh2D{mesh_x, *mesh_y}, kind) : Discretization(mesh_x, kind);
  return FemFunction::from_u(d, u);
}

json Reference::to_json() const {
  json j{{"problem", problem},
         {"constraint", kind == ConstraintKind::Obstacle ? "obstacle" : "gradient"},
         {"mesh_x", hpg::to_json(mesh_x)},
         {"u", std::vector<double>(u.data(), u.data() + u.size())},
         {"trust_h1", std::isfinite(trust) ? json(trust) : json(nullptr)}};
  if (mesh_y) j["mesh_y"] = hpg::to_json(*mesh_y);
  return j;
}

Reference Reference::from_json(const json& j) {
  Reference r;
  r.problem = j.at("problem");
  r.kind = j.at("constraint") == "gradient" ? ConstraintKind::Gradient : ConstraintKind::Obstacle;
  r.mesh_x = mesh_from_json(j.at("mesh_x"));
  if (j.contains("mesh_y")) r.mesh_y = mesh_from_json(j["mesh_y"]);
  const auto u = j.at("u").get<std::vector<double>>();
  r.u = Eigen::Map<const VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
  r.trust = j.contains("trust_h1") && !j["trust_h1"].is_null() ? j["trust_h1"].get<double>() : kNaN;
  return r;
}

void save_reference(const Reference& r, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_reference: cannot open " + path);
  os << r.to_json().dump() << '\n';
}

Reference load_reference(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_reference: cannot open " + path);
  return Reference::from_json(json::parse(is));
}

std::vector<StudyRow> run_study(const StudySpec& spec, const std::optional<Reference>& ref) {
  const ProblemData prob = problem_for(spec);
  if (spec.problem == ProblemKind::Thermoforming) throw std::invalid_argument("run_study: use thermoform_solve");
  if (adaptive(spec.strategy) && prob.dim != 1)
    throw std::invalid_argument("run_study: adaptive strategies are 1D only");
  if (spec.p < 1 || spec.cells < 1 || spec.steps < 1) throw std::invalid_argument("run_study: bad p, cells or steps");
  const LvppOptions opts = lvpp_options_for(spec, prob);
  const std::optional<ExactSolution1D> exact =
      spec.problem == ProblemKind::Obstacle1D ? std::optional(oscillatory_exact()) : std::nullopt;
  const std::optional<FemFunction> ref_f = ref ? std::optional(ref->function()) : std::nullopt;

  Mesh1D m1 = uniform_mesh_1d(0, 1, spec.cells, spec.p);
  TensorMesh2D m2 = uniform_mesh_2d(0, 1, spec.cells, spec.p);
  std::vector<StudyRow> rows;
  for (int level = 0; level < spec.steps; ++level) {
    StudyRow row;
    row.level = level;
    const Mesh1D& mx = prob.dim == 1 ? m1 : m2.mesh_x;
    row.h_min = mx.h_min();
    row.h_max = mx.h_max();
    row.p_min = mx.p_min();
    row.p_max = mx.p_max();

    if (prob.dim == 1 && m1.p_max() == 1) {
      if (spec.problem != ProblemKind::Obstacle1D) throw std::invalid_argument("run_study: p = 1 needs obstacle1d");
      const PdasResult r = pdas_solve(m1, prob.f, prob.phi);
      row.dofs = static_cast<int>(r.u.size());
      row.newton_total = r.iterations;
      row.t_assembly = r.t_assembly;
      row.t_linsolve_avg = r.t_linsolve_avg();
      row.t_total = r.t_total;
      row.status = r.status;
      row.h1_error = h1_error_1d(pdas_function(m1, r.u), *exact);
      rows.push_back(row);
      if (!r.converged) break;
      if (adaptive(spec.strategy))
        m1 = refine_cells(m1, mark_cells(pdas_estimate(m1, prob.f, r), spec.delta));
      else if (spec.strategy == Strategy::HUniform)
        m1 = refine_all(m1);
      else if (spec.strategy == Strategy::PUniform)
        m1 = m1.with_degree(1 + spec.p_increment);
      else
        m1 = refine_all(m1).with_degree(1 + spec.p_increment);
      continue;
    }

    const Discretization d = prob.dim == 1 ? Discretization(m1, prob.constraint) : Discretization(m2, prob.constraint);
    const LvppSolver solver(d, prob.f, prob.phi, opts);
    LvppState st = solver.initial_state();
    const SolveReport rep = solver.solve(prob.schedule, st);
    row.dofs = d.num_u0();
    row.newton_total = rep.newton_total();
    row.gmres_avg = rep.gmres_avg();
    row.t_assembly = rep.t_assembly();
    row.t_linsolve_avg = rep.t_linsolve_avg();
    row.t_total = rep.t_total;
    row.status = rep.status;
    const FemFunction u = FemFunction::from_u(d, st.u);
    row.h1_error = exact ? h1_error_1d(u, *exact) : ref_f ? h1_distance(u, *ref_f) : kNaN;
    rows.push_back(row);
    if (!rep.converged) break;

    const int inc = spec.p_increment;
    switch (spec.strategy) {
      case Strategy::HUniform:
        if (prob.dim == 1)
          m1 = refine_all(m1);
        else
          m2 = refine_uniform(m2, 0);
        break;
      case Strategy::PUniform:
        if (prob.dim == 1)
          m1 = m1.with_degree(m1.p_max() + inc);
        else
          m2 = with_degree(m2, m2.mesh_x.p_max() + inc);
        break;
      case Strategy::HPUniform:
        if (prob.dim == 1)
          m1 = refine_all(m1).with_degree(m1.p_max() + inc);
        else
          m2 = refine_uniform(m2, inc);
        break;
      case Strategy::HAdaptive:
      case Strategy::HPAdaptive: {
        const EstimatorInput in{&d, st.u, st.psi, st.lambda(), st.alpha, prob.f, prob.phi};
        const auto est = estimate_error(in);
        if (spec.strategy == Strategy::HPAdaptive) {
          m1 = hp_refine_step(in, est, spec.sigma, spec.delta).mesh;
        } else {
          std::vector<double> eta2;
          for (const auto& e : est) eta2.push_back(e.eta2());
          m1 = refine_cells(m1, mark_cells(eta2, spec.delta)).with_degree(m1.p_max() + inc);
        }
        break;
      }
    }
  }
  return rows;
}

void write_study_csv(const std::vector<StudyRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_study_csv: cannot open " + path);
  os.precision(10);
  os << "dofs,h_min,h_max,p_min,p_max,H1_error,newton_total,gmres_avg,t_assembly_s,t_linsolve_avg_s,t_total_s,"
        "status\n";
  for (const auto& r : rows)
    os << r.dofs << ',' << r.h_min << ',' << r.h_max << ',' << r.p_min << ',' << r.p_max << ',' << r.h1_error << ','
       << r.newton_total << ',' << r.gmres_avg << ',' << r.t_assembly << ',' << r.t_linsolve_avg << ','
       << r.t_total << ',' << r.status << '\n';
}

Reference make_reference(const StudySpec& spec) {
  const ProblemData prob = problem_for(spec);
  if (spec.problem == ProblemKind::Thermoforming) throw std::invalid_argument("make_reference: not for thermoforming");
  const LvppOptions opts = lvpp_options_for(spec, prob);
  auto solve = [&](int cells, Reference& out) {
    const Discretization d = prob.dim == 1 ? Discretization(uniform_mesh_1d(0, 1, cells, spec.p), prob.constraint)
                                           : Discretization(uniform_mesh_2d(0, 1, cells, spec.p), prob.constraint);
    const LvppSolver solver(d, prob.f, prob.phi, opts);
    LvppState st = solver.initial_state();
    const SolveReport rep = solver.solve(prob.schedule, st);
    if (!rep.converged) throw std::runtime_error("make_reference: solve failed (" + rep.status + ")");
    out.problem = to_string(spec.problem);
    out.kind = prob.constraint;
    out.mesh_x = d.mesh_x();
    if (d.mesh_y()) out.mesh_y = *d.mesh_y();
    out.u = st.u;
  };
  Reference fine;
  solve(spec.cells, fine);
  fine.trust = kNaN;
  if (spec.cells % 2 == 0) {
    Reference coarse;
    solve(spec.cells / 2, coarse);
    fine.trust = h1_distance(fine.function(), coarse.function());
  }
  return fine;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

BenchRow bench_preconditioner(ConstraintKind kind, int dim, int cells, int p, double beta, double rtol) {
  const Discretization d = dim == 1 ? Discretization(uniform_mesh_1d(0, 1, cells, p), kind)
                                    : Discretization(uniform_mesh_2d(0, 1, cells, p), kind);
  const SpMat A = assemble_stiffness(d);
  const SpMat B = assemble_gram(d);
  const SpdSolver solver(A, dim == 1);
  const CellBlocks E = assemble_E_beta(d, beta);
  const VectorXd zero = VectorXd::Zero(d.num_psi());
  CellBlocks D = kind == ConstraintKind::Obstacle
                     ? obstacle_terms(d, zero).jacobian
                     : gradient_terms(d, zero, sample_cells(d, [](double, double) { return 1.0; })).jacobian;
  for (auto& b : D.blocks) b.setZero();

  BenchRow row{kind == ConstraintKind::Obstacle ? "obstacle" : "gradient", dim, cells, p};
  const auto t0 = std::chrono::steady_clock::now();
  const BlockPreconditioner pre =
      kind == ConstraintKind::Obstacle ? build_obstacle_preconditioner(d, 1.0, D, E) : build_gradient_preconditioner(D, E);
  row.t_factor = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const SaddleSystem sys{&A, &solver, &B, &D, &E, 1.0};
  const GmresResult r = gmres(sys.schur_op(), VectorXd::Ones(d.num_psi()), pre.op(), {rtol, 0.0, 1000, PrecondSide::Left});
  row.iterations = r.iterations;
  row.converged = r.converged;
  return row;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_bench_csv: cannot open " + path);
  os << "kind,dim,cells,inv_h,p,gmres_iterations,converged,t_factor_s\n";
  for (const auto& r : rows)
    os << r.kind << ',' << r.dim << ',' << r.cells << ',' << r.cells << ',' << r.p << ',' << r.iterations << ','
       << (r.converged ? 1 : 0) << ',' << r.t_factor << '\n';
}

void write_grid_csv(const FemFunction& f, int n, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_grid_csv: cannot open " + path);
  os.precision(12);
  const double a = f.xbreaks().front(), b = f.xbreaks().back();
  if (f.dim() == 1) {
    os << "x,u\n";
    for (int i = 0; i <= n; ++i) {
      const double x = a + (b - a) * i / n;
      os << x << ',' << f.value(x) << '\n';
    }
    return;
  }
  const double c = f.ybreaks().front(), e = f.ybreaks().back();
  os << "x,y,u\n";
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const double x = a + (b - a) * i / n, y = c + (e - c) * j / n;
      os << x << ',' << y << ',' << f.value(x, y) << '\n';
    }
}

}  // namespace hpg
