// Refinement loop driver, partition replay, and the diagnostic certificate
// scan. The loop keeps weights keyed by exact grid points so warm starts
// survive re-indexing when subdivision inserts new vertices.

#include "refinement.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "certificate_scan.hpp"

namespace blasso {

namespace {

struct GridLess {
  bool operator()(const GridPoint& a, const GridPoint& b) const {
    return grid_point_less(a, b);
  }
};

Measure extract_atoms(const PointSet& verts, const Eigen::VectorXd& weights) {
  Measure mu;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (std::abs(weights[i]) > 1e-12) {
      mu.weights.push_back(weights[i]);
      mu.locations.push_back(verts.points[static_cast<std::size_t>(i)]);
    }
  }
  return mu;
}

// Newton steps on grad A*q = 0 from an ascent-polished point. Deep partitions
// decide cell membership at offsets far below the scan resolution (a level-22
// leaf is ~2e-7 wide while gradient ascent stalls ~1e-9 from the critical
// point), so the maximizer must be located to machine precision. Falls back
// to the input whenever Newton stalls, leaves the domain, or loses value —
// boundary maximizers keep their projected-ascent location.
Vec newton_sharpen(const GaussianOperator& op, const Eigen::VectorXd& q,
                   const Vec& x0) {
  const double v0 = std::abs(certificate(op, q, x0));
  Vec x = x0, best = x0;
  double best_slope = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 30; ++it) {
    const Vec g = certificate_grad(op, q, x);
    // The certificate value is flat to rounding noise across the peak, so
    // the gradient norm arbitrates which iterate to keep; the value check
    // only rejects real descents (e.g. stepping inward off a boundary max).
    if (g.norm() < best_slope &&
        std::abs(certificate(op, q, x)) >= v0 - 1e-12 * std::max(1.0, v0)) {
      best = x;
      best_slope = g.norm();
    }
    if (g.norm() == 0.0) break;
    const Mat h = certificate_hess(op, q, x);
    const Vec step = h.fullPivLu().solve(-g);
    if (!step.allFinite() || step.norm() > op.sigma) break;
    x += step;
    bool inside = true;
    for (Eigen::Index d = 0; d < x.size(); ++d)
      if (x[d] < 0.0 || x[d] > 1.0) inside = false;
    if (!inside) break;
  }
  return best;
}

}  // namespace

RefinementLog run_refinement(const RunConfig& config) {
  const GaussianOperator& op = config.op;
  if (op.dim < 1) throw std::invalid_argument("run: operator dimension unset");
  if (config.y.size() != op.num_measurements())
    throw std::invalid_argument("run: data size != measurement count");
  if (config.target_level < 1)
    throw std::invalid_argument("run: target level must be >= 1");
  if (config.max_iterations < 1)
    throw std::invalid_argument("run: iteration cap must be >= 1");
  if (config.ground_truth && config.ground_truth->dim != op.dim)
    throw std::invalid_argument("run: ground truth dimension mismatch");

  Partition partition = config.initial_partition.leaves.empty()
                            ? make_initial_partition(op.dim)
                            : config.initial_partition;
  if (partition.dim != op.dim)
    throw std::invalid_argument("run: partition dimension mismatch");

  RefinementLog log;
  log.dim = op.dim;
  log.rule = config.rule;
  log.target_level = config.target_level;
  log.initial_partition = partition;

  SolverOptions sopts;
  sopts.tol_gap = config.tol_gap;
  sopts.max_iterations = config.solver_max_iterations;

  std::map<GridPoint, double, GridLess> warm;
  PointSet last_verts;
  Eigen::VectorXd last_weights;
  bool stopped = false;

  for (long k = 0; k < config.max_iterations; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<GridPoint> grid = partition_grid_vertices(partition);
    PointSet verts;
    verts.dim = op.dim;
    verts.points.reserve(grid.size());
    for (const GridPoint& gp : grid) verts.points.push_back(grid_point_coords(gp));
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto it = warm.find(grid[i]);
      if (it != warm.end()) w0[static_cast<Eigen::Index>(i)] = it->second;
    }

    DualSolution sol;
    try {
      sol = solve_discretized(op, config.y, verts, sopts, &w0);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("refinement iteration " + std::to_string(k) +
                             ": " + e.what());
    }

    Eigen::VectorXd q_sel = sol.q;
    if (config.rescale_dual) q_sel /= 1.0 + sol.feas_violation;
    CandidateSet cands = select_candidates(op, partition, q_sel, config.rule);

    IterationRecord rec;
    rec.k = k;
    rec.num_vertices = static_cast<long>(grid.size());
    rec.primal = sol.primal;
    rec.q = q_sel;
    rec.weights = sol.weights;
    rec.gap = sol.gap;
    rec.feas_violation = sol.feas_violation;
    rec.candidates = cands;
    rec.dist_to_truth = config.ground_truth
                            ? hausdorff(verts, *config.ground_truth)
                            : std::numeric_limits<double>::quiet_NaN();

    last_verts = verts;
    last_weights = sol.weights;
    warm.clear();
    for (std::size_t i = 0; i < grid.size(); ++i)
      warm.emplace(grid[i], sol.weights[static_cast<Eigen::Index>(i)]);

    bool stop = cands.cells.empty();
    if (!stop) {
      int min_level = cands.cells.front().level;
      for (const DyadicCell& c : cands.cells)
        min_level = std::min(min_level, c.level);
      if (min_level > config.target_level) {
        stop = true;  // every flagged cell is already finer than 2^-J
      } else {
        for (const DyadicCell& c : cands.cells)
          if (c.level == min_level) rec.refined.push_back(c);
      }
    }
    if (!stop)
      for (const DyadicCell& c : rec.refined) refine(partition, c);

    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    log.iterations.push_back(std::move(rec));
    if (stop) {
      stopped = true;
      break;
    }
  }
  log.hit_iteration_cap = !stopped;

  if (config.restrict_final_support && !log.iterations.empty() &&
      !log.iterations.back().candidates.cells.empty()) {
    std::map<GridPoint, double, GridLess> corners;
    for (const DyadicCell& c : log.iterations.back().candidates.cells) {
      for (int mask = 0; mask < (1 << c.dim()); ++mask) {
        std::vector<std::int64_t> idx = c.index;
        for (int d = 0; d < c.dim(); ++d) idx[d] += (mask >> d) & 1;
        const GridPoint gp = canonical_grid_point(c.level, std::move(idx));
        const auto it = warm.find(gp);
        corners.emplace(gp, it != warm.end() ? it->second : 0.0);
      }
    }
    PointSet verts;
    verts.dim = op.dim;
    Eigen::VectorXd w0(static_cast<Eigen::Index>(corners.size()));
    Eigen::Index i = 0;
    for (const auto& [gp, w] : corners) {
      verts.points.push_back(grid_point_coords(gp));
      w0[i++] = w;
    }
    const DualSolution sol = solve_discretized(op, config.y, verts, sopts, &w0);
    log.solution = extract_atoms(verts, sol.weights);
  } else {
    log.solution = extract_atoms(last_verts, last_weights);
  }
  return log;
}

Partition partition_at(const RefinementLog& log, std::size_t k) {
  Partition p = log.initial_partition;
  const std::size_t upto = std::min(k, log.iterations.size());
  for (std::size_t i = 0; i < upto; ++i)
    for (const DyadicCell& c : log.iterations[i].refined) refine(p, c);
  return p;
}

PointSet local_maximizers(const GaussianOperator& op, const Eigen::VectorXd& q,
                          const Partition& partition, double resolution) {
  if (!(resolution > 0.0))
    throw std::invalid_argument("local maximizers: resolution must be > 0");
  const int D = op.dim;
  const long n = std::max<long>(1, std::llround(1.0 / resolution));
  const long npts = n + 1;
  long total = 1;
  for (int d = 0; d < D; ++d) total *= npts;
  const std::vector<double> vals = certificate_grid(op, q, n);

  const auto decode = [&](long idx, long* c) {
    for (int d = 0; d < D; ++d) {
      c[d] = idx % npts;
      idx /= npts;
    }
  };
  const auto encode = [&](const long* c) {
    long idx = 0;
    for (int d = D - 1; d >= 0; --d) idx = idx * npts + c[d];
    return idx;
  };

  std::vector<Vec> starts;
  long coord[3], nb[3];
  int pow3 = 1;
  for (int d = 0; d < D; ++d) pow3 *= 3;
  for (long idx = 0; idx < total; ++idx) {
    const double f = std::abs(vals[static_cast<std::size_t>(idx)]);
    if (f < 0.5) continue;
    decode(idx, coord);
    bool is_max = true;
    for (int code = 0; code < pow3 && is_max; ++code) {
      int c = code;
      bool valid = true, central = true;
      for (int d = 0; d < D; ++d) {
        const int off = c % 3 - 1;
        c /= 3;
        if (off != 0) central = false;
        nb[d] = coord[d] + off;
        if (nb[d] < 0 || nb[d] >= npts) valid = false;
      }
      if (central || !valid) continue;
      if (std::abs(vals[static_cast<std::size_t>(encode(nb))]) > f)
        is_max = false;
    }
    if (!is_max) continue;
    Vec x(D);
    for (int d = 0; d < D; ++d)
      x[d] = static_cast<double>(coord[d]) / static_cast<double>(n);
    starts.push_back(x);
  }
  for (const DyadicCell& cell : partition.leaves) {
    Vec center = lower_corner(cell);
    center.array() += 0.5 * edge_length(cell);
    if (std::abs(certificate(op, q, center)) >= 0.5) starts.push_back(center);
  }

  std::vector<std::pair<double, Vec>> found;
  for (const Vec& x0 : starts) {
    const Vec x = newton_sharpen(op, q, ascent_polish(op, q, x0, 50));
    const double v = std::abs(certificate(op, q, x));
    if (v >= 1.0) found.emplace_back(v, x);
  }

  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  PointSet out;
  out.dim = D;
  for (const auto& [v, x] : found) {
    bool fresh = true;
    for (const Vec& y : out.points)
      if ((x - y).norm() <= resolution) fresh = false;
    if (fresh) out.points.push_back(x);
  }
  std::sort(out.points.begin(), out.points.end(), [](const Vec& a, const Vec& b) {
    for (Eigen::Index d = 0; d < a.size(); ++d) {
      if (a[d] < b[d]) return true;
      if (a[d] > b[d]) return false;
    }
    return false;
  });
  return out;
}

}  // namespace blasso
