/*
 * C interface to the sparse-measure recovery library.
 *
 * The library recovers a sparse measure on [0,1]^D from finitely many Gaussian
 * samples by solving a total-variation-regularized least-squares problem on
 * adaptively refined dyadic grids: solve the discretized problem on the
 * current grid's vertices, keep only cells whose certified certificate bound
 * reaches the unit threshold, subdivide those, repeat. A Frank-Wolfe-style
 * exchange baseline, a parameter-space fine-tuner for reference solutions and
 * a randomized audit of the certified bounds are included.
 *
 * All objects are opaque; every fallible call returns a status code and leaves
 * a human-readable message in blasso_last_error() (thread-local). Functions
 * returning pointers return NULL on failure.
 */

#ifndef BLASSO_H
#define BLASSO_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum blasso_status {
  BLASSO_OK = 0,
  BLASSO_ERR_INVALID_ARGUMENT = 1,
  BLASSO_ERR_CONVERGENCE = 2, /* iteration budget hit before tolerance */
  BLASSO_ERR_CAPACITY = 3,    /* dyadic refinement depth cap exceeded */
  BLASSO_ERR_DEGENERATE_PATH = 4, /* weight crossed zero during fine-tuning */
  BLASSO_ERR_IO = 5,
  BLASSO_ERR_UNKNOWN = 6
} blasso_status;

/* Library version string, e.g. "1.0.0". */
const char* blasso_version(void);

/* Message of the most recent failure on the calling thread ("" if none). */
const char* blasso_last_error(void);

typedef struct blasso_problem blasso_problem;
typedef struct blasso_log blasso_log;

/*
 * Built-in 1D problem: `measurements` Gaussian samples centered at m/M for
 * m = 1..M, width sigma, amplitude 1/(sqrt(2 pi) sigma), synthesized from the
 * two-spike ground truth 8 at 1/3 and -9 at 2/3. measurements <= 0 selects 20;
 * sigma <= 0 selects 2/M.
 */
blasso_problem* blasso_problem_create_1d(int measurements, double sigma);

/*
 * Built-in 2D problem: samples centered on the grid (m1, m2)/grid_side for
 * m_i = 0..grid_side-1, width sigma, amplitude 1/(2 pi sigma), synthesized
 * from the three-spike ground truth -9 at (1/3,1/3), 8 at (1/3,2/3), 5 at
 * (2/3,2/3). grid_side <= 0 selects 15; sigma <= 0 selects 2/grid_side.
 */
blasso_problem* blasso_problem_create_2d(int grid_side, double sigma);

/*
 * Custom problem: `centers` is measurements x dim row-major, `y` the observed
 * samples (length measurements). amplitude <= 0 selects 1/(2 pi sigma). The
 * problem starts without a ground truth (distance columns stay empty).
 */
blasso_problem* blasso_problem_create(int dim, int measurements,
                                      const double* centers, double sigma,
                                      double amplitude, const double* y);

void blasso_problem_destroy(blasso_problem* problem);

int blasso_problem_dim(const blasso_problem* problem);
int blasso_problem_measurements(const blasso_problem* problem);

/*
 * Replace the ground truth with `count` atoms; `locations` is count x dim
 * row-major, entries in [0,1]. With regenerate_data nonzero the observations
 * are re-synthesized from the new truth (noiseless forward model); with zero
 * the data is kept and the truth only serves as the distance reference and
 * fine-tuning start.
 */
blasso_status blasso_problem_set_truth(blasso_problem* problem, int count,
                                       const double* weights,
                                       const double* locations,
                                       int regenerate_data);

typedef struct blasso_run_options {
  /* Selection rule: "first", "second", "second+grad", "third", "third+grad2". */
  const char* rule;
  /* Remainder-constant mode: "local" (per-cell) or "global" (domain-wide). */
  const char* kappa_mode;
  int target_level;           /* refinement stops below edge 2^-target_level */
  long max_iterations;        /* safety cap on refinement iterations */
  double tol_gap;             /* <= 0: 1e-9 * max(1, half squared data norm) */
  long solver_max_iterations; /* per inner solve */
  int rescale_dual;           /* feed selection the feasibility-rescaled dual */
  int restrict_final_support; /* re-solve on candidate-cell vertices at the end */
  /*
   * with_reference nonzero: fine-tune the ground truth into the measured-data
   * optimum first and report distances to its support (the metric used by the
   * iteration tables); zero: report distances to the raw ground-truth atoms,
   * or none if the problem has no truth.
   */
  int with_reference;
  double reference_step;      /* <= 0: 2e-6 */
  long reference_iterations;  /* <= 0: 600000 */
  const char* cache_dir;      /* reference cache directory; NULL or "": off */
} blasso_run_options;

void blasso_run_options_init(blasso_run_options* options);

/* Adaptive-refinement run; on success *out_log owns the iteration log. */
blasso_status blasso_run(const blasso_problem* problem,
                         const blasso_run_options* options,
                         blasso_log** out_log);

typedef struct blasso_fw_options {
  double grid_resolution; /* <= 0: 1e-4 in 1D, 1/512 otherwise */
  long iterations;        /* <= 0: 40 */
  double tol_gap;
  long solver_max_iterations;
  int with_reference; /* as in blasso_run_options */
  double reference_step;
  long reference_iterations;
  const char* cache_dir;
} blasso_fw_options;

void blasso_fw_options_init(blasso_fw_options* options);

/* Frank-Wolfe-style exchange baseline; same log shape as blasso_run. */
blasso_status blasso_run_frank_wolfe(const blasso_problem* problem,
                                     const blasso_fw_options* options,
                                     blasso_log** out_log);

long blasso_log_iterations(const blasso_log* log);
int blasso_log_hit_cap(const blasso_log* log);

/*
 * Per-iteration summary row; every output pointer may be NULL. dist is NaN
 * when no distance reference was available.
 */
blasso_status blasso_log_row(const blasso_log* log, long k, long* vertices,
                             double* primal, double* gap,
                             double* feas_violation, double* dist);

/* CSV table: header iteration,vertices,primal,dist_hausdorff; LF endings. */
blasso_status blasso_log_write_csv(const blasso_log* log, const char* path);

/* Full machine-readable log (schema_version 1). */
blasso_status blasso_log_write_json(const blasso_log* log, const char* path);

/*
 * CSV at `path` plus the JSON log as a sidecar (path with a trailing ".csv"
 * replaced by ".json", otherwise path + ".json").
 */
blasso_status blasso_log_write_table(const blasso_log* log, const char* path);

/* Number of atoms in the final solution measure. */
long blasso_log_solution_size(const blasso_log* log);

/*
 * Copy up to `capacity` atoms of the final solution into weights (length
 * capacity) and locations (capacity x dim row-major); either may be NULL to
 * skip. Returns BLASSO_ERR_INVALID_ARGUMENT if capacity is less than the
 * solution size.
 */
blasso_status blasso_log_solution(const blasso_log* log, long capacity,
                                  double* weights, double* locations);

void blasso_log_destroy(blasso_log* log);

/*
 * Fixed-step joint descent over weights and locations, started from the
 * problem's ground truth (which must be set). step <= 0 selects 2e-6,
 * iterations <= 0 selects 600000. On success *count is the atom count,
 * weights/locations receive up to `capacity` atoms (row-major locations) and
 * *objective the resulting data-fit objective; output pointers may be NULL.
 */
blasso_status blasso_finetune(const blasso_problem* problem, double step,
                              long iterations, long capacity, double* weights,
                              double* locations, long* count,
                              double* objective);

typedef struct blasso_bound_report {
  /*
   * Signed violation maxima over all sampled (dual, cell) pairs; a positive
   * upper/lower entry is a certification failure, taylor_gap entries additionally
   * absorb the sampling slack of the polished supremum estimate.
   */
  double upper_violation[3];      /* sampled sup - upper bound, orders 1..3 */
  double lower_violation[2];      /* gradient lower bound - sampled inf */
  double taylor_gap_violation[2]; /* (ub - full Taylor gap) - sampled sup */
  int samples;
} blasso_bound_report;

/* Randomized bound audit on the built-in setup of the given dimension (1/2). */
blasso_status blasso_check_bounds(int dim, int samples,
                                  unsigned long long seed,
                                  blasso_bound_report* report);

#ifdef __cplusplus
}
#endif

#endif /* BLASSO_H */
