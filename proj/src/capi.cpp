// C ABI layer: opaque handles over the recovery core, exception-to-status
// mapping, and a thread-local error message.

#include "blasso.h"

#include <algorithm>
#include <exception>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "bound_check.hpp"
#include "experiments.hpp"
#include "frank_wolfe.hpp"
#include "refinement.hpp"
#include "types.hpp"

namespace {

thread_local std::string t_last_error;

// Runs `body` and folds any escaping exception into a status code. Inside IO
// entry points a plain runtime_error means a file problem; everywhere else it
// is unexpected.
template <typename F>
blasso_status guard(F&& body, bool io_context = false) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    t_last_error = e.what();
    return BLASSO_ERR_INVALID_ARGUMENT;
  } catch (const blasso::ConvergenceError& e) {
    t_last_error = e.what();
    return BLASSO_ERR_CONVERGENCE;
  } catch (const blasso::CapacityError& e) {
    t_last_error = e.what();
    return BLASSO_ERR_CAPACITY;
  } catch (const blasso::DegeneratePathError& e) {
    t_last_error = e.what();
    return BLASSO_ERR_DEGENERATE_PATH;
  } catch (const std::runtime_error& e) {
    t_last_error = e.what();
    return io_context ? BLASSO_ERR_IO : BLASSO_ERR_UNKNOWN;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return BLASSO_ERR_UNKNOWN;
  } catch (...) {
    t_last_error = "unknown failure";
    return BLASSO_ERR_UNKNOWN;
  }
}

blasso_status fail(blasso_status code, const char* msg) {
  t_last_error = msg;
  return code;
}

blasso::SelectionRule rule_from_options(const char* rule_name,
                                        const char* kappa_mode) {
  blasso::SelectionRule rule =
      blasso::parse_rule(rule_name ? rule_name : "second");
  const std::string mode = kappa_mode ? kappa_mode : "local";
  if (mode == "local")
    rule.kappa_mode = blasso::KappaMode::LocalCell;
  else if (mode == "global")
    rule.kappa_mode = blasso::KappaMode::GlobalTimesNorm;
  else
    throw std::invalid_argument("unknown kappa mode: " + mode);
  return rule;
}

// Distance reference for the iteration tables: the fine-tuned optimum's
// support when requested, otherwise the raw ground-truth atoms if present.
// Returns false when the log should carry no distances.
bool distance_reference(const blasso::Problem& problem, int with_reference,
                        double step, long iterations, const char* cache_dir,
                        blasso::PointSet& out) {
  if (with_reference) {
    const blasso::Measure mu = blasso::reference_solution(
        problem, step > 0.0 ? step : 2e-6,
        iterations > 0 ? iterations : 600000, cache_dir ? cache_dir : "");
    out.dim = problem.op.dim;
    out.points = mu.locations;
    return true;
  }
  if (!problem.ground_truth.locations.empty()) {
    out.dim = problem.op.dim;
    out.points = problem.ground_truth.locations;
    return true;
  }
  return false;
}

}  // namespace

struct blasso_problem {
  blasso::Problem problem;
};

struct blasso_log {
  blasso::RefinementLog log;
};

extern "C" {

const char* blasso_version(void) { return "1.0.0"; }

const char* blasso_last_error(void) { return t_last_error.c_str(); }

blasso_problem* blasso_problem_create_1d(int measurements, double sigma) {
  blasso_problem* out = nullptr;
  guard([&]() -> blasso_status {
    auto p = std::make_unique<blasso_problem>();
    p->problem =
        blasso::make_problem_1d(measurements > 0 ? measurements : 20, sigma);
    out = p.release();
    return BLASSO_OK;
  });
  return out;
}

blasso_problem* blasso_problem_create_2d(int grid_side, double sigma) {
  blasso_problem* out = nullptr;
  guard([&]() -> blasso_status {
    auto p = std::make_unique<blasso_problem>();
    p->problem = blasso::make_problem_2d(grid_side > 0 ? grid_side : 15, sigma);
    out = p.release();
    return BLASSO_OK;
  });
  return out;
}

blasso_problem* blasso_problem_create(int dim, int measurements,
                                      const double* centers, double sigma,
                                      double amplitude, const double* y) {
  blasso_problem* out = nullptr;
  guard([&]() -> blasso_status {
    if (dim < 1 || dim > 3)
      throw std::invalid_argument("dimension must be 1, 2 or 3");
    if (measurements < 1)
      throw std::invalid_argument("need at least one measurement");
    if (!centers || !y)
      throw std::invalid_argument("null centers or observations");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    Eigen::MatrixXd c(measurements, dim);
    for (int m = 0; m < measurements; ++m)
      for (int d = 0; d < dim; ++d) c(m, d) = centers[m * dim + d];
    auto p = std::make_unique<blasso_problem>();
    p->problem.op = blasso::make_operator(dim, std::move(c), sigma, amplitude);
    p->problem.y = Eigen::Map<const Eigen::VectorXd>(y, measurements);
    out = p.release();
    return BLASSO_OK;
  });
  return out;
}

void blasso_problem_destroy(blasso_problem* problem) { delete problem; }

int blasso_problem_dim(const blasso_problem* problem) {
  return problem ? problem->problem.op.dim : 0;
}

int blasso_problem_measurements(const blasso_problem* problem) {
  return problem ? problem->problem.op.num_measurements() : 0;
}

blasso_status blasso_problem_set_truth(blasso_problem* problem, int count,
                                       const double* weights,
                                       const double* locations,
                                       int regenerate_data) {
  if (!problem) return fail(BLASSO_ERR_INVALID_ARGUMENT, "null problem");
  return guard([&]() -> blasso_status {
    if (count < 1) throw std::invalid_argument("need at least one atom");
    if (!weights || !locations)
      throw std::invalid_argument("null atom arrays");
    const int d = problem->problem.op.dim;
    blasso::Measure mu;
    for (int i = 0; i < count; ++i) {
      mu.weights.push_back(weights[i]);
      blasso::Vec x(d);
      for (int j = 0; j < d; ++j) {
        x[j] = locations[i * d + j];
        if (!(x[j] >= 0.0 && x[j] <= 1.0))
          throw std::invalid_argument("atom locations must lie in [0,1]^D");
      }
      mu.locations.push_back(x);
    }
    problem->problem.ground_truth = std::move(mu);
    if (regenerate_data)
      problem->problem.y =
          blasso::forward(problem->problem.op, problem->problem.ground_truth);
    return BLASSO_OK;
  });
}

void blasso_run_options_init(blasso_run_options* options) {
  if (!options) return;
  options->rule = "second";
  options->kappa_mode = "local";
  options->target_level = 10;
  options->max_iterations = 200;
  options->tol_gap = 0.0;
  options->solver_max_iterations = 2000000;
  options->rescale_dual = 0;
  options->restrict_final_support = 0;
  options->with_reference = 0;
  options->reference_step = 0.0;
  options->reference_iterations = 0;
  options->cache_dir = nullptr;
}

blasso_status blasso_run(const blasso_problem* problem,
                         const blasso_run_options* options,
                         blasso_log** out_log) {
  if (!problem || !options || !out_log)
    return fail(BLASSO_ERR_INVALID_ARGUMENT, "null argument");
  *out_log = nullptr;
  return guard([&]() -> blasso_status {
    blasso::RunConfig cfg;
    cfg.op = problem->problem.op;
    cfg.y = problem->problem.y;
    cfg.rule = rule_from_options(options->rule, options->kappa_mode);
    cfg.target_level = options->target_level;
    cfg.max_iterations = options->max_iterations;
    cfg.tol_gap = options->tol_gap;
    cfg.solver_max_iterations = options->solver_max_iterations;
    cfg.rescale_dual = options->rescale_dual != 0;
    cfg.restrict_final_support = options->restrict_final_support != 0;
    blasso::PointSet ref;
    if (distance_reference(problem->problem, options->with_reference,
                           options->reference_step,
                           options->reference_iterations, options->cache_dir,
                           ref))
      cfg.ground_truth = &ref;
    auto log = std::make_unique<blasso_log>();
    log->log = blasso::run_refinement(cfg);
    *out_log = log.release();
    return BLASSO_OK;
  });
}

void blasso_fw_options_init(blasso_fw_options* options) {
  if (!options) return;
  options->grid_resolution = 0.0;
  options->iterations = 40;
  options->tol_gap = 0.0;
  options->solver_max_iterations = 2000000;
  options->with_reference = 0;
  options->reference_step = 0.0;
  options->reference_iterations = 0;
  options->cache_dir = nullptr;
}

blasso_status blasso_run_frank_wolfe(const blasso_problem* problem,
                                     const blasso_fw_options* options,
                                     blasso_log** out_log) {
  if (!problem || !options || !out_log)
    return fail(BLASSO_ERR_INVALID_ARGUMENT, "null argument");
  *out_log = nullptr;
  return guard([&]() -> blasso_status {
    blasso::FrankWolfeConfig cfg;
    cfg.op = problem->problem.op;
    cfg.y = problem->problem.y;
    cfg.grid_resolution = options->grid_resolution > 0.0
                              ? options->grid_resolution
                              : (cfg.op.dim == 1 ? 1e-4 : 1.0 / 512.0);
    cfg.iterations = options->iterations > 0 ? options->iterations : 40;
    cfg.tol_gap = options->tol_gap;
    cfg.solver_max_iterations = options->solver_max_iterations;
    blasso::PointSet ref;
    if (distance_reference(problem->problem, options->with_reference,
                           options->reference_step,
                           options->reference_iterations, options->cache_dir,
                           ref))
      cfg.ground_truth = &ref;
    auto log = std::make_unique<blasso_log>();
    log->log = blasso::run_frank_wolfe(cfg);
    *out_log = log.release();
    return BLASSO_OK;
  });
}

long blasso_log_iterations(const blasso_log* log) {
  return log ? static_cast<long>(log->log.iterations.size()) : 0;
}

int blasso_log_hit_cap(const blasso_log* log) {
  return log && log->log.hit_iteration_cap ? 1 : 0;
}

blasso_status blasso_log_row(const blasso_log* log, long k, long* vertices,
                             double* primal, double* gap,
                             double* feas_violation, double* dist) {
  if (!log) return fail(BLASSO_ERR_INVALID_ARGUMENT, "null log");
  if (k < 0 || k >= static_cast<long>(log->log.iterations.size()))
    return fail(BLASSO_ERR_INVALID_ARGUMENT, "iteration index out of range");
  const blasso::IterationRecord& rec =
      log->log.iterations[static_cast<std::size_t>(k)];
  if (vertices) *vertices = rec.num_vertices;
  if (primal) *primal = rec.primal;
  if (gap) *gap = rec.gap;
  if (feas_violation) *feas_violation = rec.feas_violation;
  if (dist) *dist = rec.dist_to_truth;
  return BLASSO_OK;
}

blasso_status blasso_log_write_csv(const blasso_log* log, const char* path) {
  if (!log || !path) return fail(BLASSO_ERR_INVALID_ARGUMENT, "null argument");
  return guard(
      [&]() -> blasso_status {
        std::ofstream os(path, std::ios::binary);
        if (!os)
          throw std::runtime_error(std::string("cannot open for writing: ") +
                                   path);
        blasso::log_to_csv(log->log, os);
        if (!os.flush())
          throw std::runtime_error(std::string("write failed: ") + path);
        return BLASSO_OK;
      },
      true);
}

blasso_status blasso_log_write_json(const blasso_log* log, const char* path) {
  if (!log || !path) return fail(BLASSO_ERR_INVALID_ARGUMENT, "null argument");
  return guard(
      [&]() -> blasso_status {
        std::ofstream os(path, std::ios::binary);
        if (!os)
          throw std::runtime_error(std::string("cannot open for writing: ") +
                                   path);
        os << blasso::log_to_json(log->log).dump(2) << '\n';
        if (!os.flush())
          throw std::runtime_error(std::string("write failed: ") + path);
        return BLASSO_OK;
      },
      true);
}

blasso_status blasso_log_write_table(const blasso_log* log, const char* path) {
  if (!log || !path) return fail(BLASSO_ERR_INVALID_ARGUMENT, "null argument");
  return guard(
      [&]() -> blasso_status {
        blasso::emit_table(log->log, path);
        return BLASSO_OK;
      },
      true);
}

long blasso_log_solution_size(const blasso_log* log) {
  return log ? static_cast<long>(log->log.solution.weights.size()) : 0;
}

blasso_status blasso_log_solution(const blasso_log* log, long capacity,
                                  double* weights, double* locations) {
  if (!log) return fail(BLASSO_ERR_INVALID_ARGUMENT, "null log");
  const long n = static_cast<long>(log->log.solution.weights.size());
  if (capacity < n)
    return fail(BLASSO_ERR_INVALID_ARGUMENT, "capacity below solution size");
  const int d = log->log.dim;
  for (long i = 0; i < n; ++i) {
    if (weights) weights[i] = log->log.solution.weights[i];
    if (locations)
      for (int j = 0; j < d; ++j)
        locations[i * d + j] =
            log->log.solution.locations[static_cast<std::size_t>(i)][j];
  }
  return BLASSO_OK;
}

void blasso_log_destroy(blasso_log* log) { delete log; }

blasso_status blasso_finetune(const blasso_problem* problem, double step,
                              long iterations, long capacity, double* weights,
                              double* locations, long* count,
                              double* objective) {
  if (!problem) return fail(BLASSO_ERR_INVALID_ARGUMENT, "null problem");
  return guard([&]() -> blasso_status {
    if (problem->problem.ground_truth.weights.empty())
      throw std::invalid_argument("fine-tune requires a ground truth");
    const blasso::Measure mu = blasso::fine_tune(
        problem->problem.op, problem->problem.ground_truth, problem->problem.y,
        step > 0.0 ? step : 2e-6, iterations > 0 ? iterations : 600000);
    const long n = static_cast<long>(mu.weights.size());
    if (count) *count = n;
    const int d = problem->problem.op.dim;
    const long ncopy = std::min(capacity, n);
    for (long i = 0; i < ncopy; ++i) {
      if (weights) weights[i] = mu.weights[static_cast<std::size_t>(i)];
      if (locations)
        for (int j = 0; j < d; ++j)
          locations[i * d + j] = mu.locations[static_cast<std::size_t>(i)][j];
    }
    if (objective)
      *objective =
          blasso::primal_value(problem->problem.op, mu, problem->problem.y);
    return BLASSO_OK;
  });
}

blasso_status blasso_check_bounds(int dim, int samples,
                                  unsigned long long seed,
                                  blasso_bound_report* report) {
  if (!report) return fail(BLASSO_ERR_INVALID_ARGUMENT, "null report");
  return guard([&]() -> blasso_status {
    const blasso::BoundSweepResult r = blasso::bound_sweep(dim, samples, seed);
    for (int i = 0; i < 3; ++i) report->upper_violation[i] = r.upper_violation[i];
    for (int i = 0; i < 2; ++i) {
      report->lower_violation[i] = r.lower_violation[i];
      report->taylor_gap_violation[i] = r.taylor_gap_violation[i];
    }
    report->samples = r.samples;
    return BLASSO_OK;
  });
}

}  // extern "C"
