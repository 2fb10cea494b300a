// Acceptance gate for the adaptive-refinement recovery scheme. Runs the
// builtin 1D and 2D benchmarks plus randomized audits and prints one
// PASS/FAIL line per criterion; the exit code is the number of failures.
// Tolerances are pinned here on purpose — loosening them is a product change.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bound_check.hpp"
#include "experiments.hpp"
#include "gaussian_operator.hpp"
#include "geometry.hpp"
#include "lasso_solver.hpp"
#include "refinement.hpp"
#include "selection.hpp"

using namespace blasso;

namespace {

struct Criterion {
  std::string label;
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double run_seconds(const std::function<RefinementLog()>& body,
                   RefinementLog& out) {
  const auto t0 = std::chrono::steady_clock::now();
  out = body();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

// Partitions as presented to each iteration, plus the terminal one.
std::vector<Partition> all_partitions(const RefinementLog& log) {
  std::vector<Partition> parts;
  for (std::size_t k = 0; k <= log.iterations.size(); ++k)
    parts.push_back(partition_at(log, k));
  return parts;
}

const std::vector<SelectionRule>& all_rules() {
  static const std::vector<SelectionRule> rules = [] {
    std::vector<SelectionRule> r;
    for (const char* name :
         {"first", "second", "second+grad", "third", "third+grad2"})
      r.push_back(parse_rule(name));
    return r;
  }();
  return rules;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria(10);

  // Shared benchmark runs. The fine-tuned reference optimum provides the
  // distance target X for both problems.
  const Problem p1 = make_problem_1d();
  const Measure ref1 = reference_solution(p1);
  const PointSet x1{1, ref1.locations};

  RunConfig tight_cfg;
  tight_cfg.op = p1.op;
  tight_cfg.y = p1.y;
  tight_cfg.rule = parse_rule("second");
  tight_cfg.target_level = 21;
  tight_cfg.tol_gap = 1e-10;
  tight_cfg.ground_truth = &x1;
  RefinementLog tight;
  const double tight_seconds =
      run_seconds([&] { return run_refinement(tight_cfg); }, tight);

  RunConfig grad_cfg = tight_cfg;
  grad_cfg.rule = parse_rule("second+grad");
  grad_cfg.ground_truth = &x1;
  RefinementLog grad;
  run_seconds([&] { return run_refinement(grad_cfg); }, grad);

  const Problem p2 = make_problem_2d();
  const Measure ref2 = reference_solution(p2);
  const PointSet x2{2, ref2.locations};

  RunConfig plane_cfg;
  plane_cfg.op = p2.op;
  plane_cfg.y = p2.y;
  plane_cfg.rule = parse_rule("second");
  plane_cfg.target_level = 13;
  plane_cfg.max_iterations = 25;
  plane_cfg.ground_truth = &x2;
  RefinementLog plane;
  const double plane_seconds =
      run_seconds([&] { return run_refinement(plane_cfg); }, plane);

  const std::vector<Partition> tight_parts = all_partitions(tight);
  const std::vector<Partition> grad_parts = all_partitions(grad);
  const std::vector<Partition> plane_parts = all_partitions(plane);

  // 1. 1D benchmark, second-order rule: iteration count, optimum value,
  //    support distance, vertex economy and the solver-independent burn-in.
  {
    Criterion& c = criteria[0];
    c.label = "1d benchmark matches the published trajectory";
    c.require(tight.iterations.size() <= 30,
              "iterations " + std::to_string(tight.iterations.size()) + " > 30");
    const IterationRecord& last = tight.iterations.back();
    const double rel = std::abs(last.primal - 1.69805e+01) / 1.69805e+01;
    c.require(rel <= 1e-3, "terminal primal " + fmt(last.primal) +
                               " off by rel " + fmt(rel));
    c.require(last.dist_to_truth <= 1e-6,
              "terminal support distance " + fmt(last.dist_to_truth) + " > 1e-6");
    c.require(last.num_vertices <= 400,
              "terminal vertices " + std::to_string(last.num_vertices) + " > 400");
    const long expected[6] = {2, 3, 5, 9, 17, 33};
    for (int k = 0; k <= 5; ++k)
      c.require(tight.iterations[static_cast<std::size_t>(k)].num_vertices ==
                    expected[k],
                "burn-in vertex count at k=" + std::to_string(k));
    c.require(tight_seconds < 30.0, "runtime " + fmt(tight_seconds) + "s");
  }

  // 2. Gradient filter: per-iteration candidate sets are subsets of the
  //    bound-only sets on the same dual vector, and the terminal grid is no
  //    larger than the bound-only run's.
  {
    Criterion& c = criteria[1];
    c.label = "gradient filter only prunes candidates";
    const SelectionRule bound_only = parse_rule("second");
    for (std::size_t k = 0; k < grad.iterations.size(); ++k) {
      const IterationRecord& rec = grad.iterations[k];
      const CandidateSet wide =
          select_candidates(grad_cfg.op, grad_parts[k], rec.q, bound_only);
      for (const DyadicCell& cell : rec.candidates.cells) {
        const bool found = std::find(wide.cells.begin(), wide.cells.end(),
                                     cell) != wide.cells.end();
        c.require(found, "filtered candidate outside bound-only set at k=" +
                             std::to_string(k));
        if (!found) break;
      }
    }
    c.require(grad.iterations.back().num_vertices <=
                  tight.iterations.back().num_vertices,
              "filtered terminal grid larger than bound-only");
  }

  // 3. 2D benchmark: uniform burn-in counts, support distance within the
  //    iteration budget, and terminal vertex economy versus the uniform grid
  //    at the achieved resolution.
  {
    Criterion& c = criteria[2];
    c.label = "2d benchmark: burn-in, distance, vertex economy";
    c.require(plane.iterations.size() <= 25,
              "iterations " + std::to_string(plane.iterations.size()) + " > 25");
    for (std::size_t k = 0; k <= 4 && k < plane.iterations.size(); ++k) {
      const long side = (1L << k) + 1;
      c.require(plane.iterations[k].num_vertices == side * side,
                "burn-in count at k=" + std::to_string(k));
    }
    const IterationRecord& last = plane.iterations.back();
    c.require(last.dist_to_truth <= 2e-3,
              "terminal support distance " + fmt(last.dist_to_truth) + " > 2e-3");
    int deepest = 0;
    for (const DyadicCell& cell : plane_parts.back().leaves)
      deepest = std::max(deepest, cell.level);
    const double uniform =
        std::pow(static_cast<double>((1L << deepest) + 1), 2.0);
    c.require(static_cast<double>(last.num_vertices) <= 0.02 * uniform,
              "terminal vertices " + std::to_string(last.num_vertices) +
                  " above 2% of uniform level-" + std::to_string(deepest) +
                  " grid");
    c.require(plane_seconds < 300.0, "runtime " + fmt(plane_seconds) + "s");
  }

  // 4/5. Randomized certification audit: 100 (dual, cell) draws per
  //      dimension; sampled suprema/infima against the certified bounds, and
  //      the two-sided Taylor-gap inequalities with slack 1e-3.
  {
    Criterion& cb = criteria[3];
    cb.label = "certified bounds dominate sampled extrema (zero violations)";
    Criterion& ct = criteria[4];
    ct.label = "upper bounds tight to their Taylor gap (slack 1e-3)";
    for (int dim = 1; dim <= 2; ++dim) {
      const BoundSweepResult sweep = bound_sweep(dim, 100, 20260821u);
      for (int i = 0; i < 3; ++i)
        cb.require(sweep.upper_violation[i] <= 0.0,
                   "upper bound order " + std::to_string(i + 1) + " dim " +
                       std::to_string(dim) + " violated by " +
                       fmt(sweep.upper_violation[i]));
      for (int i = 0; i < 2; ++i)
        cb.require(sweep.lower_violation[i] <= 0.0,
                   "gradient lower bound order " + std::to_string(i + 1) +
                       " dim " + std::to_string(dim) + " violated by " +
                       fmt(sweep.lower_violation[i]));
      for (int i = 0; i < 2; ++i)
        ct.require(sweep.taylor_gap_violation[i] <= 1e-3,
                   "Taylor gap order " + std::to_string(i + 2) + " dim " +
                       std::to_string(dim) + " violated by " +
                       fmt(sweep.taylor_gap_violation[i]));
    }
  }

  // 6. Every diagnostic certificate landmark (local maximizer with value
  //    >= 1) lies inside a candidate cell, for every selection rule, at every
  //    iteration of both benchmark runs.
  {
    Criterion& c = criteria[5];
    c.label = "certificate landmarks always covered by candidate cells";
    const struct {
      const RefinementLog* log;
      const std::vector<Partition>* parts;
      const GaussianOperator* op;
      double resolution;
    } scans[2] = {{&tight, &tight_parts, &p1.op, 1e-3},
                  {&plane, &plane_parts, &p2.op, 1.0 / 512.0}};
    for (const auto& scan : scans) {
      for (std::size_t k = 0; k < scan.log->iterations.size(); ++k) {
        const IterationRecord& rec = scan.log->iterations[k];
        const Partition& part = (*scan.parts)[k];
        const PointSet landmarks =
            local_maximizers(*scan.op, rec.q, part, scan.resolution);
        for (const SelectionRule& rule : all_rules()) {
          const CandidateSet cand =
              select_candidates(*scan.op, part, rec.q, rule);
          for (const Vec& x : landmarks.points) {
            bool covered = false;
            for (const DyadicCell& cell : cand.cells)
              if (cell_contains(cell, x)) {
                covered = true;
                break;
              }
            c.require(covered,
                      "uncovered landmark, dim " +
                          std::to_string(scan.log->dim) + " k=" +
                          std::to_string(k) + " rule " + rule_name(rule));
            if (!covered) break;
          }
        }
      }
    }
  }

  // 7. Optimality system at tolerance 1e-5 for every logged dual/weight pair
  //    of the tight 1D run.
  {
    Criterion& c = criteria[6];
    c.label = "discretized optima satisfy the optimality system (tol 1e-5)";
    for (std::size_t k = 0; k < tight.iterations.size(); ++k) {
      const IterationRecord& rec = tight.iterations[k];
      DualSolution sol;
      sol.q = rec.q;
      sol.weights = rec.weights;
      const KktReport report = check_kkt(
          p1.op, partition_vertices(tight_parts[k]), p1.y, sol, 1e-5);
      c.require(report.pass,
                "failure at k=" + std::to_string(k) + " (bound " +
                    fmt(report.bound_residual) + ", sign " +
                    fmt(report.sign_residual) + ", consistency " +
                    fmt(report.consistency_residual) + ")");
    }
  }

  // 8. Kernel derivatives versus central finite differences, 100 random
  //    points per dimension around random measurement centers.
  {
    Criterion& c = criteria[7];
    c.label = "kernel derivatives match finite differences (rel 1e-4)";
    for (int dim = 1; dim <= 2; ++dim) {
      const GaussianOperator& op = dim == 1 ? p1.op : p2.op;
      std::mt19937_64 gen(800 + static_cast<unsigned>(dim));
      std::uniform_real_distribution<double> offset(-1.5, 1.5);
      std::uniform_int_distribution<int> pick(0, op.num_measurements() - 1);
      for (int trial = 0; trial < 100; ++trial) {
        const int m = pick(gen);
        Vec x(dim);
        for (int d = 0; d < dim; ++d)
          x[d] = std::clamp(op.centers(m, d) + op.sigma * offset(gen), 0.0,
                            1.0);
        const Vec g = grad_a(op, m, x);
        const double hg = 1e-6;
        Vec fd_g(dim);
        for (int d = 0; d < dim; ++d) {
          Vec hi = x, lo = x;
          hi[d] += hg;
          lo[d] -= hg;
          fd_g[d] = (eval_a(op, m, hi) - eval_a(op, m, lo)) / (2.0 * hg);
        }
        const double gscale =
            std::max(g.norm(), op.amplitude / op.sigma * 1e-3);
        c.require((g - fd_g).norm() / gscale <= 1e-4,
                  "gradient mismatch dim " + std::to_string(dim) + " trial " +
                      std::to_string(trial));

        const Mat h = hess_a(op, m, x);
        const double hh = 5e-5;
        Mat fd_h(dim, dim);
        const double center = eval_a(op, m, x);
        for (int i = 0; i < dim; ++i) {
          Vec hi = x, lo = x;
          hi[i] += hh;
          lo[i] -= hh;
          fd_h(i, i) = (eval_a(op, m, hi) - 2.0 * center + eval_a(op, m, lo)) /
                       (hh * hh);
          for (int j = i + 1; j < dim; ++j) {
            Vec pp = x, pm = x, mp = x, mm = x;
            pp[i] += hh;
            pp[j] += hh;
            pm[i] += hh;
            pm[j] -= hh;
            mp[i] -= hh;
            mp[j] += hh;
            mm[i] -= hh;
            mm[j] -= hh;
            fd_h(i, j) = (eval_a(op, m, pp) - eval_a(op, m, pm) -
                          eval_a(op, m, mp) + eval_a(op, m, mm)) /
                         (4.0 * hh * hh);
            fd_h(j, i) = fd_h(i, j);
          }
        }
        const double hscale = std::max(
            h.norm(), op.amplitude / (op.sigma * op.sigma) * 1e-3);
        c.require((h - fd_h).norm() / hscale <= 1e-4,
                  "Hessian mismatch dim " + std::to_string(dim) + " trial " +
                      std::to_string(trial));
      }
    }
  }

  // 9. Exact box-quadratic maximizer versus a 200-points-per-axis grid, 50
  //    random quadratics per dimension.
  {
    Criterion& c = criteria[8];
    c.label = "box-quadratic maximizer matches a dense-grid oracle";
    for (int dim = 1; dim <= 2; ++dim) {
      std::mt19937_64 gen(900 + static_cast<unsigned>(dim));
      std::normal_distribution<double> coeff(0.0, 1.0);
      std::uniform_real_distribution<double> corner(0.0, 0.8);
      std::uniform_real_distribution<double> edge(0.05, 0.2);
      for (int trial = 0; trial < 50; ++trial) {
        const double cval = coeff(gen);
        Vec g(dim), lo(dim), hi(dim);
        Mat h(dim, dim);
        for (int i = 0; i < dim; ++i) {
          g[i] = coeff(gen);
          lo[i] = corner(gen);
          hi[i] = lo[i] + edge(gen);
          for (int j = 0; j <= i; ++j) {
            h(i, j) = coeff(gen);
            h(j, i) = h(i, j);
          }
        }
        const double exact = max_abs_quadratic_on_box(cval, g, h, lo, hi);
        const int ticks = 200;
        double grid = 0.0, radius = 0.0, step = 0.0;
        Vec u(dim);
        const long total = dim == 1 ? ticks : ticks * ticks;
        for (long t = 0; t < total; ++t) {
          long rest = t;
          for (int d = 0; d < dim; ++d) {
            const long i = rest % ticks;
            rest /= ticks;
            u[d] = lo[d] + (hi[d] - lo[d]) * static_cast<double>(i) /
                               (ticks - 1);
          }
          grid = std::max(grid,
                          std::abs(cval + g.dot(u) + 0.5 * u.dot(h * u)));
          radius = std::max(radius, u.norm());
        }
        for (int d = 0; d < dim; ++d)
          step = std::max(step, (hi[d] - lo[d]) / (ticks - 1));
        const double slack =
            (g.norm() + h.norm() * radius) * step * std::sqrt(double(dim)) +
            1e-12;
        c.require(exact >= grid - 1e-9, "exact max below grid sample, dim " +
                                            std::to_string(dim) + " trial " +
                                            std::to_string(trial));
        c.require(exact <= grid + slack,
                  "exact max " + fmt(exact) + " above grid " + fmt(grid) +
                      " + slack " + fmt(slack) + ", dim " +
                      std::to_string(dim) + " trial " + std::to_string(trial));
      }
    }
  }

  // 10. Refinement discipline on every logged iteration of all three runs:
  //     refined cells carry the candidates' largest edge, the primal never
  //     increases beyond the gap tolerance, and the vertex sets are nested.
  {
    Criterion& c = criteria[9];
    c.label = "largest-cell-first refinement, monotone primal, nested grids";
    const struct {
      const RefinementLog* log;
      const std::vector<Partition>* parts;
      double tol;
      const char* name;
    } runs[3] = {
        {&tight, &tight_parts, 1e-10, "1d"},
        {&grad, &grad_parts, 1e-10, "1d+grad"},
        {&plane, &plane_parts,
         1e-9 * std::max(1.0, 0.5 * p2.y.squaredNorm()), "2d"}};
    for (const auto& run : runs) {
      for (std::size_t k = 0; k < run.log->iterations.size(); ++k) {
        const IterationRecord& rec = run.log->iterations[k];
        if (!rec.refined.empty()) {
          double max_edge = 0.0;
          for (const DyadicCell& cell : rec.candidates.cells)
            max_edge = std::max(max_edge, edge_length(cell));
          for (const DyadicCell& cell : rec.refined)
            c.require(edge_length(cell) == max_edge,
                      std::string(run.name) + ": refined a smaller cell at k=" +
                          std::to_string(k));
        }
        if (k + 1 < run.log->iterations.size())
          c.require(run.log->iterations[k + 1].primal <=
                        rec.primal + run.tol,
                    std::string(run.name) + ": primal increased at k=" +
                        std::to_string(k));
        const std::vector<GridPoint> coarse =
            partition_grid_vertices((*run.parts)[k]);
        const std::vector<GridPoint> fine =
            partition_grid_vertices((*run.parts)[k + 1]);
        c.require(std::includes(fine.begin(), fine.end(), coarse.begin(),
                                coarse.end(), grid_point_less),
                  std::string(run.name) + ": vertices not nested at k=" +
                      std::to_string(k));
      }
    }
  }

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& c = criteria[i];
    if (c.pass) {
      std::printf("PASS %2zu  %s\n", i + 1, c.label.c_str());
    } else {
      ++failures;
      std::printf("FAIL %2zu  %s: %s\n", i + 1, c.label.c_str(),
                  c.detail.c_str());
    }
  }
  std::printf("%d/10 criteria passed\n",
              static_cast<int>(criteria.size()) - failures);
  return failures;
}
