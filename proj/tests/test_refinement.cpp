// Adaptive refinement loop on the builtin line problem: the deterministic
// vertex-count trajectory down to level 21, the largest-edge refinement
// discipline, monotonicity and nestedness across iterations, partition
// replay, the certificate-landmark diagnostic, and input validation.

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "lasso_solver.hpp"
#include "refinement.hpp"

using namespace blasso;

namespace {

Vec point1(double x) {
  Vec v(1);
  v << x;
  return v;
}

// One deep deterministic run shared by several cases: second-order rule,
// target level 21, tight gap tolerance, distances against the fine-tuned
// support of the measured-data optimum.
struct TightRun {
  PointSet reference;
  RefinementLog log;
};

const TightRun& tight_run() {
  static const TightRun run = [] {
    const Problem p = make_problem_1d();
    const Measure tuned = fine_tune(p.op, p.ground_truth, p.y, 2e-6, 600000);
    TightRun r;
    r.reference.dim = 1;
    r.reference.points = tuned.locations;
    RunConfig config;
    config.op = p.op;
    config.y = p.y;
    config.rule = SelectionRule{};
    config.target_level = 21;
    config.tol_gap = 1e-10;
    config.ground_truth = &r.reference;
    r.log = run_refinement(config);
    return r;
  }();
  return run;
}

const std::vector<long> kTightCounts = {2,  3,  5,  9,  17, 33, 41, 47,
                                        53, 59, 65, 71, 77, 83, 89, 95,
                                        101, 107, 113, 119, 125, 131, 137};

}  // namespace

TEST_CASE("zero data stops after one iteration") {
  const Problem p = make_problem_1d();
  RunConfig config;
  config.op = p.op;
  config.y = Eigen::VectorXd::Zero(p.y.size());
  const RefinementLog log = run_refinement(config);
  REQUIRE(log.iterations.size() == 1);
  CHECK(log.iterations[0].primal == 0.0);
  CHECK(log.iterations[0].candidates.cells.empty());
  CHECK(log.iterations[0].refined.empty());
  CHECK_FALSE(log.hit_iteration_cap);
  CHECK(log.solution.weights.empty());
  CHECK(std::isnan(log.iterations[0].dist_to_truth));
}

TEST_CASE("deep line run follows the frozen trajectory") {
  const RefinementLog& log = tight_run().log;
  REQUIRE(log.iterations.size() == kTightCounts.size());
  CHECK_FALSE(log.hit_iteration_cap);
  for (std::size_t k = 0; k < kTightCounts.size(); ++k)
    CHECK(log.iterations[k].num_vertices == kTightCounts[k]);

  const IterationRecord& last = log.iterations.back();
  CHECK(last.primal == doctest::Approx(1.69804794e+01).epsilon(1e-6));
  CHECK(last.dist_to_truth <= 1e-6);
  CHECK(last.dist_to_truth > 0.0);

  // Each spike's weight may split across the pair of terminal-level vertices
  // bracketing it; clustered by location the solution is the two spikes at
  // the fine-tuned optimum.
  REQUIRE(log.solution.weights.size() >= 2);
  std::vector<double> mass, centroid;
  for (std::size_t i = 0; i < log.solution.weights.size(); ++i) {
    const double w = log.solution.weights[i];
    const double x = log.solution.locations[i](0);
    if (!centroid.empty() &&
        std::abs(x - centroid.back() / mass.back()) < 1e-5) {
      mass.back() += w;
      centroid.back() += w * x;
    } else {
      mass.push_back(w);
      centroid.push_back(w * x);
    }
  }
  REQUIRE(mass.size() == 2);
  CHECK(mass[0] == doctest::Approx(7.980480712781).epsilon(1e-4));
  CHECK(mass[1] == doctest::Approx(-8.980480797591).epsilon(1e-4));
  CHECK(centroid[0] / mass[0] == doctest::Approx(0.333262935974).epsilon(1e-6));
  CHECK(centroid[1] / mass[1] == doctest::Approx(0.666729242942).epsilon(1e-6));
}

TEST_CASE("every iteration obeys the refinement discipline") {
  const RefinementLog& log = tight_run().log;
  for (const IterationRecord& rec : log.iterations) {
    // Refined cells are exactly the flagged cells of largest edge length.
    if (rec.candidates.cells.empty()) {
      CHECK(rec.refined.empty());
      continue;
    }
    int coarsest = rec.candidates.cells[0].level;
    for (const DyadicCell& cell : rec.candidates.cells)
      coarsest = std::min(coarsest, cell.level);
    std::size_t at_coarsest = 0;
    for (const DyadicCell& cell : rec.candidates.cells)
      if (cell.level == coarsest) ++at_coarsest;
    // Past the target the flagged cells are left alone and the loop stops.
    if (rec.refined.empty()) {
      CHECK(coarsest > log.target_level);
      continue;
    }
    CHECK(rec.refined.size() == at_coarsest);
    for (const DyadicCell& cell : rec.refined) CHECK(cell.level == coarsest);
    // Upper bounds of flagged cells reach the threshold.
    REQUIRE(rec.candidates.bound_values.size() == rec.candidates.cells.size());
    for (double b : rec.candidates.bound_values) CHECK(b >= 1.0);
  }
}

TEST_CASE("objective values decrease and vertex sets nest") {
  const RefinementLog& log = tight_run().log;
  for (std::size_t k = 0; k + 1 < log.iterations.size(); ++k)
    CHECK(log.iterations[k + 1].primal <= log.iterations[k].primal + 1e-10);

  std::vector<GridPoint> prev;
  for (std::size_t k = 0; k <= log.iterations.size(); ++k) {
    const Partition part = partition_at(log, k);
    std::vector<GridPoint> grid = partition_grid_vertices(part);
    if (k < log.iterations.size())
      CHECK(static_cast<long>(grid.size()) == log.iterations[k].num_vertices);
    CHECK(std::includes(grid.begin(), grid.end(), prev.begin(), prev.end(),
                        grid_point_less));
    prev = std::move(grid);
  }
}

TEST_CASE("per-iteration state is sized with the vertex list") {
  const RefinementLog& log = tight_run().log;
  for (const IterationRecord& rec : log.iterations) {
    CHECK(rec.weights.size() == rec.num_vertices);
    CHECK(rec.q.size() == 20);
    CHECK(rec.gap <= 1e-10);
    CHECK(rec.feas_violation >= 0.0);
    CHECK(rec.wall_time_s >= 0.0);
  }
}

TEST_CASE("partition replay starts from the initial partition") {
  const RefinementLog& log = tight_run().log;
  const Partition first = partition_at(log, 0);
  CHECK(first.leaves.size() == 1);
  CHECK(first.leaves[0].level == 0);
  const Partition last = partition_at(log, log.iterations.size());
  // Cells at the target level were still refined; their children, one level
  // deeper, were flagged but left alone, which is what stopped the loop.
  int deepest = 0;
  for (const DyadicCell& leaf : last.leaves)
    deepest = std::max(deepest, leaf.level);
  CHECK(deepest == log.target_level + 1);
  // Indices beyond the last iteration clamp to the final partition.
  CHECK(partition_at(log, log.iterations.size() + 7).leaves.size() ==
        last.leaves.size());
}

TEST_CASE("gradient filter keeps the early trajectory and the terminal grid") {
  const Problem p = make_problem_1d();
  RunConfig config;
  config.op = p.op;
  config.y = p.y;
  config.rule = SelectionRule{BoundOrder::Second, GradientFilter::FirstOrderGrad,
                              KappaMode::LocalCell};
  config.target_level = 21;
  config.tol_gap = 1e-10;
  const RefinementLog log = run_refinement(config);

  const RefinementLog& plain = tight_run().log;
  // The filter cannot add candidates, so early counts match the plain rule
  // (nothing is filtered there) and the terminal count cannot exceed it.
  for (std::size_t k = 0; k <= 5; ++k)
    CHECK(log.iterations[k].num_vertices == plain.iterations[k].num_vertices);
  CHECK(log.iterations.back().num_vertices <=
        plain.iterations.back().num_vertices);
  CHECK(log.iterations.back().primal ==
        doctest::Approx(1.69804794e+01).epsilon(1e-6));
}

TEST_CASE("iteration cap is reported") {
  const Problem p = make_problem_1d();
  RunConfig config;
  config.op = p.op;
  config.y = p.y;
  config.max_iterations = 3;
  config.target_level = 21;
  const RefinementLog log = run_refinement(config);
  CHECK(log.iterations.size() == 3);
  CHECK(log.hit_iteration_cap);
}

TEST_CASE("solver failures carry the iteration context") {
  const Problem p = make_problem_1d();
  RunConfig config;
  config.op = p.op;
  config.y = p.y;
  config.tol_gap = 1e-300;
  config.solver_max_iterations = 5;
  try {
    run_refinement(config);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::string(e.what()).find("refinement iteration") !=
          std::string::npos);
  }
}

TEST_CASE("certificate landmarks: none, one, two") {
  const Problem p = make_problem_1d();
  Partition part = make_initial_partition(1);
  refine(part, part.leaves[0]);

  // Zero certificate: no landmarks.
  const PointSet none = local_maximizers(
      p.op, Eigen::VectorXd::Zero(p.y.size()), part, 1e-3);
  CHECK(none.points.empty());

  // One kernel scaled to peak at 1.1: a single landmark at its center.
  Eigen::MatrixXd center(1, 1);
  center << 0.5;
  const GaussianOperator single = make_operator(1, std::move(center), 0.1);
  Eigen::VectorXd q1(1);
  q1 << 1.1 / single.amplitude;
  const PointSet one = local_maximizers(single, q1, part, 1e-3);
  REQUIRE(one.points.size() == 1);
  CHECK(one.points[0](0) == doctest::Approx(0.5).epsilon(1e-3));

  // The optimal certificate of the deep run peaks at the two spikes.
  const RefinementLog& log = tight_run().log;
  const PointSet two = local_maximizers(
      p.op, log.iterations.back().q, partition_at(log, log.iterations.size()),
      1e-3);
  REQUIRE(two.points.size() == 2);
  CHECK(std::abs(two.points[0](0) - 1.0 / 3.0) < 1e-2);
  CHECK(std::abs(two.points[1](0) - 2.0 / 3.0) < 1e-2);

  CHECK_THROWS_AS(local_maximizers(p.op, log.iterations.back().q, part, 0.0),
                  std::invalid_argument);
}

TEST_CASE("landmarks live in candidate cells for every rule") {
  const RefinementLog& log = tight_run().log;
  const Problem p = make_problem_1d();
  const std::size_t k = 5;
  const Partition part = partition_at(log, k);
  const Eigen::VectorXd& q = log.iterations[k].q;
  const PointSet landmarks = local_maximizers(p.op, q, part, 1e-3);
  CHECK(!landmarks.points.empty());

  const SelectionRule rules[] = {
      {BoundOrder::First, GradientFilter::None, KappaMode::LocalCell},
      {BoundOrder::Second, GradientFilter::None, KappaMode::LocalCell},
      {BoundOrder::Second, GradientFilter::FirstOrderGrad, KappaMode::LocalCell},
      {BoundOrder::Third, GradientFilter::None, KappaMode::LocalCell},
      {BoundOrder::Third, GradientFilter::SecondOrderGrad, KappaMode::LocalCell},
  };
  for (const SelectionRule& rule : rules) {
    const CandidateSet set = select_candidates(p.op, part, q, rule);
    for (const Vec& x : landmarks.points) {
      bool covered = false;
      for (const DyadicCell& cell : set.cells)
        covered = covered || cell_contains(cell, x);
      CHECK(covered);
    }
  }
}

TEST_CASE("restricting the final support re-solves on candidate corners") {
  const Problem p = make_problem_1d();
  RunConfig config;
  config.op = p.op;
  config.y = p.y;
  config.target_level = 8;
  config.tol_gap = 1e-10;
  config.restrict_final_support = true;
  const RefinementLog log = run_refinement(config);
  CHECK(!log.iterations.empty());
  CHECK(log.solution.weights.size() >= 1);
  for (const Vec& x : log.solution.locations)
    CHECK((x(0) >= 0.0 && x(0) <= 1.0));
}

TEST_CASE("run configuration is validated") {
  const Problem p = make_problem_1d();
  RunConfig config;  // dim never set on the operator
  config.y = p.y;
  CHECK_THROWS_AS(run_refinement(config), std::invalid_argument);

  config.op = p.op;
  config.y = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(run_refinement(config), std::invalid_argument);

  config.y = p.y;
  config.target_level = 0;
  CHECK_THROWS_AS(run_refinement(config), std::invalid_argument);

  config.target_level = 10;
  config.max_iterations = 0;
  CHECK_THROWS_AS(run_refinement(config), std::invalid_argument);

  config.max_iterations = 200;
  PointSet truth2{2, {}};
  config.ground_truth = &truth2;
  CHECK_THROWS_AS(run_refinement(config), std::invalid_argument);

  config.ground_truth = nullptr;
  config.initial_partition = make_initial_partition(2);
  CHECK_THROWS_AS(run_refinement(config), std::invalid_argument);
}
