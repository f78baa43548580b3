// Study harness: pinned slope bands, the scaled norm, table output, and
// the horizon-divisibility precondition.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gyropic/verify.hpp"

using namespace gyropic;

TEST_CASE("time-step convergence slopes sit in the pinned bands") {
  for (Scheme s : {Scheme::SI1, Scheme::SI2, Scheme::SI3, Scheme::Limit1,
                   Scheme::Limit2, Scheme::Limit3}) {
    CAPTURE(to_string(s));
    const StudyResult r =
        convergence_study(s, default_convergence_eps(s), default_dt_list(s));
    CHECK(r.pass);
    CHECK(r.rows.size() == 4);
    CHECK(std::abs(r.slope - scheme_order(s)) <= r.slope_tol);
    // Errors decrease monotonically along the refinement ladder.
    for (size_t i = 1; i < r.rows.size(); ++i)
      CHECK(r.rows[i].error < r.rows[i - 1].error);
  }
}

TEST_CASE("stiff/drift deviation shrinks at second order in eps") {
  for (int order : {1, 2, 3}) {
    CAPTURE(order);
    const StudyResult r =
        epsilon_consistency_study(order, 0.1, default_consistency_eps());
    CHECK(r.pass);
    CHECK(std::abs(r.slope - 2.0) <= 0.3);
  }
}

TEST_CASE("perpendicular velocity scales with eps in the damped regime") {
  // Fully damped range: gyration unresolved at dt=0.1 for every entry.
  const std::vector<double> eps{1e-3, 3.16227766016838e-4, 1e-4};
  const StudyResult r = vperp_damping_study(Scheme::SI3, 0.1, 100, eps);
  CHECK(r.slope == doctest::Approx(1.0).epsilon(0.2));
  CHECK(r.pass);
}

TEST_CASE("horizon divisibility is enforced") {
  CHECK_THROWS_AS(convergence_study(Scheme::SI1, 1.0, {0.1, 0.05, 0.03, 0.025}),
                  std::invalid_argument);
  CHECK_THROWS_AS(epsilon_consistency_study(1, 0.3, default_consistency_eps()),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_study(Scheme::SI1, 1.0, {0.1, 0.05, 0.025}),
                  std::invalid_argument);  // too few rows
}

TEST_CASE("study table lands on disk as param,error,slope") {
  StudyResult r;
  r.name = "demo";
  r.rows = {{0.1, 1e-2}, {0.05, 5e-3}};
  r.slope = 1.0;
  r.pass = true;
  r.slope_target = 1.0;
  r.slope_tol = 0.15;
  write_study_csv(r, "study_test.csv");
  std::ifstream in("study_test.csv");
  std::string header, row;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, row));
  CHECK(header == "param,error,slope");
  double p, e, s;
  REQUIRE(std::sscanf(row.c_str(), "%lf,%lf,%lf", &p, &e, &s) == 3);
  CHECK(p == 0.1);
  CHECK(e == 1e-2);
  CHECK(s == 1.0);
  std::remove("study_test.csv");

  const std::string line = study_summary_line(r);
  CHECK(line.rfind("PASS demo", 0) == 0);
  CHECK(line.find("slope=1.000") != std::string::npos);
}
