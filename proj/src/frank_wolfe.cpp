// Frank-Wolfe style exchange loop over an uncertified maximizer search.

#include "frank_wolfe.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "certificate_scan.hpp"
#include "lasso_solver.hpp"

namespace blasso {

RefinementLog run_frank_wolfe(const FrankWolfeConfig& config) {
  const GaussianOperator& op = config.op;
  if (op.dim < 1) throw std::invalid_argument("fw: operator dimension unset");
  if (config.y.size() != op.num_measurements())
    throw std::invalid_argument("fw: data size != measurement count");
  if (!(config.grid_resolution > 0.0))
    throw std::invalid_argument("fw: grid resolution must be > 0");
  if (config.iterations < 1)
    throw std::invalid_argument("fw: iteration budget must be >= 1");
  if (config.ground_truth && config.ground_truth->dim != op.dim)
    throw std::invalid_argument("fw: ground truth dimension mismatch");

  const int D = op.dim;
  const long n =
      std::max<long>(1, std::llround(1.0 / config.grid_resolution));
  const long npts = n + 1;

  RefinementLog log;
  log.dim = D;
  log.target_level = 0;
  log.initial_partition = make_initial_partition(D);

  PointSet verts = cell_vertices(log.initial_partition.leaves.front());
  SolverOptions sopts;
  sopts.tol_gap = config.tol_gap;
  sopts.max_iterations = config.solver_max_iterations;

  Eigen::VectorXd warm = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(verts.points.size()));
  Eigen::VectorXd last_weights;
  bool stopped = false;

  for (long k = 0; k < config.iterations; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    DualSolution sol;
    try {
      sol = solve_discretized(op, config.y, verts, sopts, &warm);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("fw iteration " + std::to_string(k) + ": " +
                             e.what());
    }
    last_weights = sol.weights;

    IterationRecord rec;
    rec.k = k;
    rec.num_vertices = static_cast<long>(verts.points.size());
    rec.primal = sol.primal;
    rec.q = sol.q;
    rec.weights = sol.weights;
    rec.gap = sol.gap;
    rec.feas_violation = sol.feas_violation;
    rec.dist_to_truth = config.ground_truth
                            ? hausdorff(verts, *config.ground_truth)
                            : std::numeric_limits<double>::quiet_NaN();

    // Grid argmax of |A*q|, then ascent sharpening.
    const std::vector<double> vals = certificate_grid(op, sol.q, n);
    std::size_t best_idx = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (std::abs(vals[i]) > best) {
        best = std::abs(vals[i]);
        best_idx = i;
      }
    }
    Vec x(D);
    {
      auto idx = static_cast<long>(best_idx);
      for (int d = 0; d < D; ++d) {
        x[d] = static_cast<double>(idx % npts) / static_cast<double>(n);
        idx /= npts;
      }
    }
    x = ascent_polish(op, sol.q, x, 50);
    const double peak = std::max(best, std::abs(certificate(op, sol.q, x)));

    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    bool stop = peak <= 1.0 + 1e-9;
    if (!stop) {
      for (const Vec& v : verts.points)
        if ((v - x).norm() <= 1e-14) stop = true;  // maximizer already present
    }
    if (!stop) {
      verts.points.push_back(x);
      Eigen::VectorXd grown(warm.size() + 1);
      grown << sol.weights, 0.0;
      warm = grown;
    }
    log.iterations.push_back(std::move(rec));
    if (stop) {
      stopped = true;
      break;
    }
  }
  log.hit_iteration_cap = !stopped;

  Measure mu;
  for (Eigen::Index i = 0; i < last_weights.size(); ++i) {
    if (std::abs(last_weights[i]) > 1e-12) {
      mu.weights.push_back(last_weights[i]);
      mu.locations.push_back(verts.points[static_cast<std::size_t>(i)]);
    }
  }
  log.solution = mu;
  return log;
}

}  // namespace blasso
