// Exchange-style baseline: grow the vertex set one point per iteration by a
// dense-grid + gradient-ascent search for the certificate maximizer, instead
// of certified cell selection. The maximizer search is a heuristic -- there
// is no guarantee the grid catches the global maximum -- which is exactly the
// contrast the certified refinement loop is built to avoid.

#pragma once

#include <Eigen/Dense>

#include "gaussian_operator.hpp"
#include "refinement.hpp"
#include "types.hpp"

namespace blasso {

struct FrankWolfeConfig {
  GaussianOperator op;
  Eigen::VectorXd y;
  double grid_resolution = 1e-4;  // scan spacing per axis
  long iterations = 40;
  double tol_gap = 0.0;  // 0 -> solver default
  long solver_max_iterations = 2000000;
  const PointSet* ground_truth = nullptr;
};

// Starts from the corners of [0,1]^D; per iteration: solve the discretized
// dual on the accumulated points, scan the grid for the largest |A*q|,
// sharpen it by 50 ascent steps, append the point. Stops when the certificate
// maximum is within 1e-9 of feasible, when a duplicate point appears, or at
// the iteration budget (the last is flagged in the log).
RefinementLog run_frank_wolfe(const FrankWolfeConfig& config);

}  // namespace blasso
