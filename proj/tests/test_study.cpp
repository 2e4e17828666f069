#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "hpg/study.hpp"

using namespace hpg;

TEST_CASE("strategy names") {
  for (auto s : {Strategy::HUniform, Strategy::PUniform, Strategy::HPUniform, Strategy::HAdaptive, Strategy::HPAdaptive})
    CHECK(strategy_from_string(to_string(s)) == s);
  CHECK_THROWS(strategy_from_string("x-uniform"));
}

TEST_CASE("study spec json round trip and overrides") {
  StudySpec s;
  s.problem = ProblemKind::Gradient2D;
  s.strategy = Strategy::HPUniform;
  s.p = 3;
  s.cells = 8;
  s.alpha_max = 2.0;
  s.beta = 1e-5;
  s.linear = LinearSolverKind::Schur;
  const StudySpec t = study_spec_from_json(to_json(s));
  CHECK(t.problem == s.problem);
  CHECK(t.strategy == s.strategy);
  CHECK(t.p == 3);
  CHECK(t.cells == 8);
  CHECK(*t.alpha_max == 2.0);
  CHECK(*t.linear == LinearSolverKind::Schur);
  CHECK_FALSE(t.rtol.has_value());

  const ProblemData prob = problem_for(t);
  CHECK(prob.schedule.alpha_max == 2.0);
  CHECK(prob.beta == 1e-5);
  CHECK(lvpp_options_for(t, prob).newton.linear == LinearSolverKind::Schur);

  StudySpec g;
  g.problem = ProblemKind::Gradient2D;
  CHECK(lvpp_options_for(g, problem_for(g)).newton.linear == LinearSolverKind::LU);
  StudySpec o;
  CHECK(lvpp_options_for(o, problem_for(o)).newton.linear == LinearSolverKind::Schur);

  CHECK_THROWS(study_spec_from_json(nlohmann::json{{"linear", "cg"}}));
}

TEST_CASE("loglog slope") {
  CHECK(loglog_slope({1, 2, 4, 8}, {1, 0.25, 0.0625, 0.015625}) == doctest::Approx(-2.0));
  CHECK(loglog_slope({10, 100}, {3, 3}) == doctest::Approx(0.0));
}

TEST_CASE("PDAS levels and reference files") {
  StudySpec s;
  s.p = 1;
  s.cells = 50;
  s.steps = 3;
  const auto rows = run_study(s);
  REQUIRE(rows.size() == 3);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].dofs == 2 * rows[k - 1].dofs + 1);
    CHECK(rows[k].h1_error < rows[k - 1].h1_error);
  }

  StudySpec r;
  r.p = 3;
  r.cells = 20;
  const Reference ref = make_reference(r);
  CHECK(ref.trust > 0);
  const std::string path = "test_study_reference.json";
  save_reference(ref, path);
  const Reference back = load_reference(path);
  std::remove(path.c_str());
  CHECK(back.u.size() == ref.u.size());
  CHECK((back.u - ref.u).cwiseAbs().maxCoeff() == 0.0);
  CHECK(h1_distance(back.function(), ref.function()) == 0.0);
}
