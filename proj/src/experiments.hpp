// Builtin benchmark problems, reference solutions, and table/log emission.
//
// Two canonical noiseless deconvolution setups: a 1D problem with 20
// measurements (centers m/20, width 0.1, two spikes 8 at 1/3 and -9 at 2/3)
// and a 2D problem on a grid_side x grid_side center lattice (default 15,
// width 2/grid_side, three spikes). The 1D operator uses the density
// normalization 1/(sqrt(2 pi) sigma); the 2D operator keeps the default
// 1/(2 pi sigma). Logs are emitted as a CSV summary table plus a JSON
// sidecar that captures every per-iteration detail and round-trips exactly.

#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "frank_wolfe.hpp"
#include "gaussian_operator.hpp"
#include "refinement.hpp"
#include "types.hpp"

namespace blasso {

struct Problem {
  GaussianOperator op;
  Eigen::VectorXd y;
  Measure ground_truth;
};

// sigma <= 0 selects the default 2/measurements.
Problem make_problem_1d(int measurements = 20, double sigma = 0.0);
// sigma <= 0 selects the default 2/grid_side.
Problem make_problem_2d(int grid_side = 15, double sigma = 0.0);

// The five documented rule names: first, second, second+grad, third,
// third+grad2 (kappa mode is configured separately).
SelectionRule parse_rule(const std::string& name);
std::string rule_name(const SelectionRule& rule);

// CSV rows `iteration,vertices,primal,dist_hausdorff` with primal to 6 and
// the distance to 2 significant digits (empty field when no ground truth
// was supplied). LF line endings.
void log_to_csv(const RefinementLog& log, std::ostream& os);

// Full log as JSON (schema_version 1) and back; the round-trip is exact.
nlohmann::json log_to_json(const RefinementLog& log);
RefinementLog log_from_json(const nlohmann::json& j);

// Write the CSV to path and the JSON sidecar next to it (.csv replaced by
// .json, otherwise .json appended). Throws std::runtime_error on IO failure.
void emit_table(const RefinementLog& log, const std::string& path);

// Support of the regularized optimum, computed by fixed-step descent from
// the ground truth. With a nonempty cache_dir the result is stored in a file
// keyed by a hash of the problem and parameters and reused on later calls.
Measure reference_solution(const Problem& problem, double step = 2e-6,
                           long iterations = 600000,
                           const std::string& cache_dir = "");

}  // namespace blasso
