// Adaptive dyadic refinement loop: solve the discretized dual on the current
// partition's vertices, flag candidate cells with certified bounds, subdivide
// the flagged cells of largest edge length, repeat until no cell is flagged
// or the flagged cells are finer than the 2^-J target (or a safety cap trips,
// recorded in the log). Every iteration is logged with enough state -- dual
// vector, candidate cells, refined cells -- to replay the partition sequence
// and audit the certificates afterwards.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gaussian_operator.hpp"
#include "geometry.hpp"
#include "lasso_solver.hpp"
#include "selection.hpp"
#include "types.hpp"

namespace blasso {

struct RunConfig {
  GaussianOperator op;
  Eigen::VectorXd y;
  SelectionRule rule;
  int target_level = 10;      // stop once flagged cells are finer than 2^-J
  Partition initial_partition;  // empty -> the unit cell
  double tol_gap = 0.0;       // 0 -> solver default
  long solver_max_iterations = 2000000;
  long max_iterations = 200;  // safety cap on refinement iterations
  bool rescale_dual = false;  // feed selection the feasibility-rescaled dual
  bool restrict_final_support = false;  // re-solve on candidate-cell vertices
  const PointSet* ground_truth = nullptr;  // optional support for distances
};

struct IterationRecord {
  long k = 0;
  long num_vertices = 0;
  double primal = 0.0;
  Eigen::VectorXd q;        // dual handed to selection
  Eigen::VectorXd weights;  // solver weights, aligned with the vertex list
  double gap = 0.0;
  double feas_violation = 0.0;
  CandidateSet candidates;
  std::vector<DyadicCell> refined;
  double dist_to_truth = 0.0;  // NaN when no ground truth was supplied
  double wall_time_s = 0.0;
};

struct RefinementLog {
  int dim = 0;
  SelectionRule rule;
  int target_level = 0;
  Partition initial_partition;
  bool hit_iteration_cap = false;
  std::vector<IterationRecord> iterations;
  Measure solution;  // atoms with |weight| > 1e-12 from the final solve
};

RefinementLog run_refinement(const RunConfig& config);

// The partition presented to iteration k (initial partition plus the refined
// cells of iterations 0..k-1); k = iterations.size() gives the final one.
Partition partition_at(const RefinementLog& log, std::size_t k);

// Diagnostic estimate of the certificate's super-level landmarks: dense grid
// scan of |A*q| at the given spacing, seeded also from leaf centers, with
// projected gradient ascent polish and a Newton sharpening pass that locates
// interior maximizers to machine precision; returns deduplicated local
// maximizers whose polished value reaches 1. Used by audits only, never by
// the loop.
PointSet local_maximizers(const GaussianOperator& op, const Eigen::VectorXd& q,
                          const Partition& partition, double resolution);

}  // namespace blasso
