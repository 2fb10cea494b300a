// Exchange baseline: vertex growth one point per iteration, objective
// monotonicity, recovery of the two line-problem spikes, the stopping rules,
// and input validation.

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "experiments.hpp"
#include "frank_wolfe.hpp"

using namespace blasso;

TEST_CASE("zero data stops immediately") {
  const Problem p = make_problem_1d();
  FrankWolfeConfig config;
  config.op = p.op;
  config.y = Eigen::VectorXd::Zero(p.y.size());
  const RefinementLog log = run_frank_wolfe(config);
  REQUIRE(log.iterations.size() == 1);
  CHECK(log.iterations[0].primal == 0.0);
  CHECK(log.iterations[0].num_vertices == 2);  // the interval endpoints
  CHECK_FALSE(log.hit_iteration_cap);
  CHECK(log.solution.weights.empty());
}

TEST_CASE("line problem run recovers both spikes") {
  const Problem p = make_problem_1d();
  FrankWolfeConfig config;
  config.op = p.op;
  config.y = p.y;
  config.tol_gap = 1e-10;
  PointSet truth{1, p.ground_truth.locations};
  config.ground_truth = &truth;
  const RefinementLog log = run_frank_wolfe(config);

  REQUIRE(!log.iterations.empty());
  CHECK(log.iterations.size() <= 40);

  // One new point per iteration, objective never increasing.
  for (std::size_t k = 0; k < log.iterations.size(); ++k) {
    CHECK(log.iterations[k].num_vertices == 2 + static_cast<long>(k));
    if (k > 0)
      CHECK(log.iterations[k].primal <= log.iterations[k - 1].primal + 1e-10);
  }

  CHECK(log.iterations.back().primal ==
        doctest::Approx(1.69805e+01).epsilon(1e-3));
  CHECK(log.iterations.back().dist_to_truth < 1e-2);

  // Every surviving atom sits on one of the spikes.
  REQUIRE(log.solution.weights.size() >= 2);
  for (const Vec& x : log.solution.locations) {
    const double d = std::min(std::abs(x(0) - 1.0 / 3.0),
                              std::abs(x(0) - 2.0 / 3.0));
    CHECK(d < 1e-2);
  }
}

TEST_CASE("iteration budget is flagged") {
  const Problem p = make_problem_1d();
  FrankWolfeConfig config;
  config.op = p.op;
  config.y = p.y;
  config.iterations = 3;
  const RefinementLog log = run_frank_wolfe(config);
  CHECK(log.iterations.size() == 3);
  CHECK(log.hit_iteration_cap);
}

TEST_CASE("baseline configuration is validated") {
  const Problem p = make_problem_1d();
  FrankWolfeConfig config;  // operator dimension never set
  config.y = p.y;
  CHECK_THROWS_AS(run_frank_wolfe(config), std::invalid_argument);

  config.op = p.op;
  config.y = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(run_frank_wolfe(config), std::invalid_argument);

  config.y = p.y;
  config.grid_resolution = 0.0;
  CHECK_THROWS_AS(run_frank_wolfe(config), std::invalid_argument);

  config.grid_resolution = 1e-4;
  config.iterations = 0;
  CHECK_THROWS_AS(run_frank_wolfe(config), std::invalid_argument);

  config.iterations = 40;
  PointSet truth2{2, {}};
  config.ground_truth = &truth2;
  CHECK_THROWS_AS(run_frank_wolfe(config), std::invalid_argument);
}
