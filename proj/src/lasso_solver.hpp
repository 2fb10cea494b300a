// Discretized primal/dual solver for the sparse-recovery objective
//   P(V): min_{alpha} ||alpha||_1 + 1/2 ||G alpha - y||^2,   G[m,j] = a_m(v_j),
// whose dual value at q is <q,y> - 1/2 ||q||^2 under the constraint
// max_j |G[:,j]^T q| <= 1, with the primal-dual relationship q = y - G alpha.
// Also: KKT verification, primal evaluation for point measures, and a fixed-step
// parameter-space descent used to compute reference solutions.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gaussian_operator.hpp"
#include "types.hpp"

namespace blasso {

struct SolverOptions {
  // Absolute duality-gap tolerance; <= 0 selects 1e-9 * max(1, 1/2 ||y||^2).
  double tol_gap = 0.0;
  long max_iterations = 2000000;
  // When set, receives the objective value after every iteration.
  std::vector<double>* objective_trace = nullptr;
};

struct DualSolution {
  Eigen::VectorXd q;        // y - G alpha
  Eigen::VectorXd weights;  // alpha, aligned with the vertex list
  double primal = 0.0;      // ||alpha||_1 + 1/2 ||G alpha - y||^2
  double gap = 0.0;         // primal minus dual value of the rescaled q
  double feas_violation = 0.0;  // max(0, ||G^T q||_inf - 1)
  long iterations = 0;
};

// Accelerated proximal gradient with monotone restarts and a periodic exact
// solve of the sign-restricted normal equations on the current support
// (accepted whenever it reduces the certified gap). Throws ConvergenceError if
// max_iterations elapse before the gap tolerance is met. `warm_start`, when
// non-null, must be aligned with `vertices`; new callers pass nullptr.
DualSolution solve_discretized(const GaussianOperator& op,
                               const Eigen::VectorXd& y,
                               const PointSet& vertices,
                               const SolverOptions& opts = {},
                               const Eigen::VectorXd* warm_start = nullptr);

struct KktReport {
  bool pass = false;
  double bound_residual = 0.0;        // max_j |G[:,j]^T q| - 1, clamped at 0
  double sign_residual = 0.0;         // max over alpha_j != 0 of |G_j^T q - sign(alpha_j)|
  double consistency_residual = 0.0;  // ||q - (y - G alpha)||_inf
};

// Checks (i) dual feasibility within tol, (ii) G_j^T q = sign(alpha_j) within
// tol on the support, (iii) q = y - G alpha within tol.
KktReport check_kkt(const GaussianOperator& op, const PointSet& vertices,
                    const Eigen::VectorXd& y, const DualSolution& sol,
                    double tol);

double primal_value(const GaussianOperator& op, const Measure& mu,
                    const Eigen::VectorXd& y);

// Fixed-step (sub)gradient descent jointly over weights and locations,
// locations clamped to [0,1]^D; stops after `iters` steps or once the gradient
// norm drops below 1e-12. A weight reaching or crossing zero throws
// DegeneratePathError (retry with a smaller step).
Measure fine_tune(const GaussianOperator& op, const Measure& mu0,
                  const Eigen::VectorXd& y, double step, long iters);

}  // namespace blasso
