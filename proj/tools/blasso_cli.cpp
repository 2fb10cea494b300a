// Command-line driver for the sparse-measure recovery library.
//
// Subcommands:
//   run           adaptive dyadic refinement -> iteration table (CSV + JSON)
//   fw            exchange baseline growing one vertex per iteration
//   check-bounds  randomized audit of the certified selection bounds
//   finetune      descend from the ground truth to the measured-data optimum
//
// Settings come from an optional flat key=value config file ('#' starts a
// comment) plus flags; flags take precedence over the file. Unknown or
// malformed config entries are configuration errors. Exit codes: 0 success,
// 2 configuration error, 3 solver non-convergence, 1 anything else.

#include <blasso.h>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every key accepted in a config file; keys that do not apply to the invoked
// subcommand are ignored so one file can drive several subcommands.
const std::set<std::string> kConfigKeys = {
    "problem", "measurements", "grid_side", "sigma", "weights", "locations",
    "rule", "kappa_mode", "target_level", "max_iterations", "tol_gap",
    "solver_max_iterations", "rescale_dual", "restrict_final_support", "out",
    "reference", "reference_step", "reference_iterations", "cache_dir",
    "grid_resolution", "fw_iterations", "dimension", "samples", "seed",
    "step", "iterations"};

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return std::string();
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string entry = strip(line);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    const std::string key = strip(entry.substr(0, eq));
    const std::string value = strip(entry.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    if (!kConfigKeys.count(key))
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": unknown key: " + key);
    if (!kv.emplace(key, value).second)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": duplicate key: " + key);
  }
  return kv;
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long out = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("key " + key + ": not an integer: '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("key " + key + ": not a number: '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("key " + key + ": not a boolean: '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::size_t begin = 0;
  while (begin <= v.size()) {
    auto end = v.find(',', begin);
    if (end == std::string::npos) end = v.size();
    const std::string item = strip(v.substr(begin, end - begin));
    if (item.empty())
      throw ConfigError("key " + key + ": empty element in list '" + v + "'");
    out.push_back(to_double(key, item));
    begin = end + 1;
  }
  return out;
}

// A config value applies only when the corresponding flag was not given.
bool use_config(const std::map<std::string, std::string>& kv,
                const CLI::Option* flag, const std::string& key) {
  return kv.count(key) != 0 && (flag == nullptr || flag->count() == 0);
}

struct ProblemSettings {
  std::string problem = "1d";
  long measurements = 0;  // 0 -> builtin default
  long grid_side = 0;     // 0 -> builtin default
  double sigma = 0.0;     // 0 -> builtin default
  std::vector<double> weights;    // optional custom ground truth
  std::vector<double> locations;  // row-major, dim entries per atom
};

struct ProblemFlags {
  CLI::Option* problem = nullptr;
  CLI::Option* measurements = nullptr;
  CLI::Option* grid_side = nullptr;
  CLI::Option* sigma = nullptr;
};

ProblemFlags add_problem_flags(CLI::App* cmd, ProblemSettings& s) {
  ProblemFlags f;
  f.problem =
      cmd->add_option("--problem", s.problem, "builtin problem family: 1d or 2d");
  f.measurements = cmd->add_option("--measurements", s.measurements,
                                   "1d: number of measurement centers");
  f.grid_side =
      cmd->add_option("--grid-side", s.grid_side, "2d: measurement grid side");
  f.sigma = cmd->add_option("--sigma", s.sigma, "measurement width");
  return f;
}

void apply_problem_config(const std::map<std::string, std::string>& kv,
                          const ProblemFlags& f, ProblemSettings& s) {
  if (use_config(kv, f.problem, "problem")) s.problem = kv.at("problem");
  if (use_config(kv, f.measurements, "measurements"))
    s.measurements = to_long("measurements", kv.at("measurements"));
  if (use_config(kv, f.grid_side, "grid_side"))
    s.grid_side = to_long("grid_side", kv.at("grid_side"));
  if (use_config(kv, f.sigma, "sigma"))
    s.sigma = to_double("sigma", kv.at("sigma"));
  if (kv.count("weights")) s.weights = to_list("weights", kv.at("weights"));
  if (kv.count("locations"))
    s.locations = to_list("locations", kv.at("locations"));
}

struct ProblemHandle {
  blasso_problem* ptr = nullptr;
  ~ProblemHandle() { blasso_problem_destroy(ptr); }
};

struct LogHandle {
  blasso_log* ptr = nullptr;
  ~LogHandle() { blasso_log_destroy(ptr); }
};

void build_problem(const ProblemSettings& s, ProblemHandle& h) {
  if (s.problem == "1d")
    h.ptr = blasso_problem_create_1d(static_cast<int>(s.measurements), s.sigma);
  else if (s.problem == "2d")
    h.ptr = blasso_problem_create_2d(static_cast<int>(s.grid_side), s.sigma);
  else
    throw ConfigError("unknown problem family: '" + s.problem +
                      "' (expected 1d or 2d)");
  if (!h.ptr)
    throw ConfigError(std::string("cannot build problem: ") +
                      blasso_last_error());
  if (!s.weights.empty() || !s.locations.empty()) {
    const std::size_t dim =
        static_cast<std::size_t>(blasso_problem_dim(h.ptr));
    if (s.weights.empty() || s.locations.size() != s.weights.size() * dim)
      throw ConfigError(
          "custom truth: need weights plus dim locations per atom");
    if (blasso_problem_set_truth(h.ptr, static_cast<int>(s.weights.size()),
                                 s.weights.data(), s.locations.data(),
                                 1) != BLASSO_OK)
      throw ConfigError(std::string("custom truth rejected: ") +
                        blasso_last_error());
  }
}

int status_exit(blasso_status st) {
  switch (st) {
    case BLASSO_OK:
      return 0;
    case BLASSO_ERR_INVALID_ARGUMENT:
      return 2;
    case BLASSO_ERR_CONVERGENCE:
      return 3;
    default:
      return 1;
  }
}

int report_status(const char* what, blasso_status st) {
  std::fprintf(stderr, "%s: %s\n", what, blasso_last_error());
  return status_exit(st);
}

// Same number formats as the CSV writer.
void print_rows(const blasso_log* log) {
  std::printf("iteration,vertices,primal,dist_hausdorff\n");
  const long n = blasso_log_iterations(log);
  for (long k = 0; k < n; ++k) {
    long vertices = 0;
    double primal = 0.0, dist = 0.0;
    blasso_log_row(log, k, &vertices, &primal, nullptr, nullptr, &dist);
    std::printf("%ld,%ld,%.5e,", k, vertices, primal);
    if (std::isfinite(dist)) std::printf("%.1e", dist);
    std::printf("\n");
  }
}

int emit_log(const blasso_log* log, const std::string& out) {
  if (blasso_log_hit_cap(log))
    std::fprintf(stderr,
                 "note: iteration budget reached before the stopping rule\n");
  if (out.empty()) {
    print_rows(log);
    return 0;
  }
  const blasso_status st = blasso_log_write_table(log, out.c_str());
  if (st != BLASSO_OK) return report_status("write failed", st);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse measure recovery by certified adaptive grid refinement"};
  app.require_subcommand(1);
  app.set_version_flag("--version", blasso_version());

  // --- run ---
  CLI::App* run = app.add_subcommand(
      "run", "adaptive refinement; emits the iteration table");
  std::string run_config;
  run->add_option("--config", run_config, "key=value configuration file");
  ProblemSettings run_problem;
  const ProblemFlags run_pf = add_problem_flags(run, run_problem);
  std::string run_rule = "second", run_kappa = "local", run_out, run_cache;
  long run_level = 10, run_maxit = 200, run_solver_maxit = 2000000;
  long run_ref_iters = 0;
  double run_tol = 0.0, run_ref_step = 0.0;
  bool run_rescale = false, run_restrict = false, run_reference = true;
  CLI::Option* o_run_rule = run->add_option(
      "--rule", run_rule,
      "selection rule: first|second|second+grad|third|third+grad2");
  CLI::Option* o_run_kappa = run->add_option(
      "--kappa-mode", run_kappa, "remainder-constant mode: local|global");
  CLI::Option* o_run_level = run->add_option("--target-level", run_level,
                                             "finest dyadic level to refine to");
  CLI::Option* o_run_maxit = run->add_option(
      "--max-iterations", run_maxit, "refinement iteration budget");
  CLI::Option* o_run_tol =
      run->add_option("--tol-gap", run_tol, "duality-gap tolerance (0 = auto)");
  CLI::Option* o_run_solver_maxit = run->add_option(
      "--solver-max-iterations", run_solver_maxit, "inner solver budget");
  CLI::Option* o_run_rescale = run->add_flag(
      "--rescale-dual", run_rescale, "feed selection the rescaled dual");
  CLI::Option* o_run_restrict =
      run->add_flag("--restrict-final-support", run_restrict,
                    "re-solve on candidate-cell vertices at the end");
  CLI::Option* o_run_out =
      run->add_option("--out", run_out, "CSV output path (JSON sidecar next to it)");
  CLI::Option* o_run_reference = run->add_flag(
      "--reference,!--no-reference", run_reference,
      "fine-tune the truth into the distance reference (default on)");
  CLI::Option* o_run_ref_step = run->add_option(
      "--reference-step", run_ref_step, "fine-tuning step size (0 = default)");
  CLI::Option* o_run_ref_iters =
      run->add_option("--reference-iterations", run_ref_iters,
                      "fine-tuning iteration count (0 = default)");
  CLI::Option* o_run_cache =
      run->add_option("--cache-dir", run_cache, "reference cache directory");

  // --- fw ---
  CLI::App* fw = app.add_subcommand(
      "fw", "exchange baseline; emits the iteration table");
  std::string fw_config;
  fw->add_option("--config", fw_config, "key=value configuration file");
  ProblemSettings fw_problem;
  const ProblemFlags fw_pf = add_problem_flags(fw, fw_problem);
  std::string fw_out, fw_cache;
  double fw_resolution = 0.0, fw_tol = 0.0, fw_ref_step = 0.0;
  long fw_iters = 0, fw_solver_maxit = 2000000, fw_ref_iters = 0;
  bool fw_reference = true;
  CLI::Option* o_fw_resolution = fw->add_option(
      "--grid-resolution", fw_resolution,
      "certificate scan spacing (0 = 1e-4 in 1d, 1/512 otherwise)");
  CLI::Option* o_fw_iters =
      fw->add_option("--iterations", fw_iters, "iteration budget (0 = 40)");
  CLI::Option* o_fw_tol =
      fw->add_option("--tol-gap", fw_tol, "duality-gap tolerance (0 = auto)");
  CLI::Option* o_fw_solver_maxit = fw->add_option(
      "--solver-max-iterations", fw_solver_maxit, "inner solver budget");
  CLI::Option* o_fw_out =
      fw->add_option("--out", fw_out, "CSV output path (JSON sidecar next to it)");
  CLI::Option* o_fw_reference = fw->add_flag(
      "--reference,!--no-reference", fw_reference,
      "fine-tune the truth into the distance reference (default on)");
  CLI::Option* o_fw_ref_step = fw->add_option(
      "--reference-step", fw_ref_step, "fine-tuning step size (0 = default)");
  CLI::Option* o_fw_ref_iters =
      fw->add_option("--reference-iterations", fw_ref_iters,
                     "fine-tuning iteration count (0 = default)");
  CLI::Option* o_fw_cache =
      fw->add_option("--cache-dir", fw_cache, "reference cache directory");

  // --- check-bounds ---
  CLI::App* cb = app.add_subcommand(
      "check-bounds", "randomized audit of the certified selection bounds");
  std::string cb_config;
  cb->add_option("--config", cb_config, "key=value configuration file");
  long cb_dimension = 0, cb_samples = 100, cb_seed = 1234;
  CLI::Option* o_cb_dimension =
      cb->add_option("--dimension", cb_dimension, "1 or 2 (0 audits both)");
  CLI::Option* o_cb_samples = cb->add_option(
      "--samples", cb_samples, "number of random (dual, cell) pairs");
  CLI::Option* o_cb_seed = cb->add_option("--seed", cb_seed, "random seed");

  // --- finetune ---
  CLI::App* ft = app.add_subcommand(
      "finetune", "descend from the ground truth to the measured-data optimum");
  std::string ft_config;
  ft->add_option("--config", ft_config, "key=value configuration file");
  ProblemSettings ft_problem;
  const ProblemFlags ft_pf = add_problem_flags(ft, ft_problem);
  double ft_step = 0.0;
  long ft_iters = 0;
  CLI::Option* o_ft_step =
      ft->add_option("--step", ft_step, "descent step size (0 = default)");
  CLI::Option* o_ft_iters = ft->add_option("--iterations", ft_iters,
                                           "descent iteration count (0 = default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      if (!run_config.empty()) {
        const auto kv = read_config(run_config);
        apply_problem_config(kv, run_pf, run_problem);
        if (use_config(kv, o_run_rule, "rule")) run_rule = kv.at("rule");
        if (use_config(kv, o_run_kappa, "kappa_mode"))
          run_kappa = kv.at("kappa_mode");
        if (use_config(kv, o_run_level, "target_level"))
          run_level = to_long("target_level", kv.at("target_level"));
        if (use_config(kv, o_run_maxit, "max_iterations"))
          run_maxit = to_long("max_iterations", kv.at("max_iterations"));
        if (use_config(kv, o_run_tol, "tol_gap"))
          run_tol = to_double("tol_gap", kv.at("tol_gap"));
        if (use_config(kv, o_run_solver_maxit, "solver_max_iterations"))
          run_solver_maxit =
              to_long("solver_max_iterations", kv.at("solver_max_iterations"));
        if (use_config(kv, o_run_rescale, "rescale_dual"))
          run_rescale = to_bool("rescale_dual", kv.at("rescale_dual"));
        if (use_config(kv, o_run_restrict, "restrict_final_support"))
          run_restrict =
              to_bool("restrict_final_support", kv.at("restrict_final_support"));
        if (use_config(kv, o_run_out, "out")) run_out = kv.at("out");
        if (use_config(kv, o_run_reference, "reference"))
          run_reference = to_bool("reference", kv.at("reference"));
        if (use_config(kv, o_run_ref_step, "reference_step"))
          run_ref_step = to_double("reference_step", kv.at("reference_step"));
        if (use_config(kv, o_run_ref_iters, "reference_iterations"))
          run_ref_iters =
              to_long("reference_iterations", kv.at("reference_iterations"));
        if (use_config(kv, o_run_cache, "cache_dir"))
          run_cache = kv.at("cache_dir");
      }
      ProblemHandle problem;
      build_problem(run_problem, problem);
      blasso_run_options opts;
      blasso_run_options_init(&opts);
      opts.rule = run_rule.c_str();
      opts.kappa_mode = run_kappa.c_str();
      opts.target_level = static_cast<int>(run_level);
      opts.max_iterations = run_maxit;
      opts.tol_gap = run_tol;
      opts.solver_max_iterations = run_solver_maxit;
      opts.rescale_dual = run_rescale ? 1 : 0;
      opts.restrict_final_support = run_restrict ? 1 : 0;
      opts.with_reference = run_reference ? 1 : 0;
      opts.reference_step = run_ref_step;
      opts.reference_iterations = run_ref_iters;
      opts.cache_dir = run_cache.empty() ? nullptr : run_cache.c_str();
      LogHandle log;
      const blasso_status st = blasso_run(problem.ptr, &opts, &log.ptr);
      if (st != BLASSO_OK) return report_status("run failed", st);
      return emit_log(log.ptr, run_out);
    }

    if (fw->parsed()) {
      if (!fw_config.empty()) {
        const auto kv = read_config(fw_config);
        apply_problem_config(kv, fw_pf, fw_problem);
        if (use_config(kv, o_fw_resolution, "grid_resolution"))
          fw_resolution = to_double("grid_resolution", kv.at("grid_resolution"));
        if (use_config(kv, o_fw_iters, "fw_iterations"))
          fw_iters = to_long("fw_iterations", kv.at("fw_iterations"));
        if (use_config(kv, o_fw_tol, "tol_gap"))
          fw_tol = to_double("tol_gap", kv.at("tol_gap"));
        if (use_config(kv, o_fw_solver_maxit, "solver_max_iterations"))
          fw_solver_maxit =
              to_long("solver_max_iterations", kv.at("solver_max_iterations"));
        if (use_config(kv, o_fw_out, "out")) fw_out = kv.at("out");
        if (use_config(kv, o_fw_reference, "reference"))
          fw_reference = to_bool("reference", kv.at("reference"));
        if (use_config(kv, o_fw_ref_step, "reference_step"))
          fw_ref_step = to_double("reference_step", kv.at("reference_step"));
        if (use_config(kv, o_fw_ref_iters, "reference_iterations"))
          fw_ref_iters =
              to_long("reference_iterations", kv.at("reference_iterations"));
        if (use_config(kv, o_fw_cache, "cache_dir"))
          fw_cache = kv.at("cache_dir");
      }
      ProblemHandle problem;
      build_problem(fw_problem, problem);
      blasso_fw_options opts;
      blasso_fw_options_init(&opts);
      opts.grid_resolution = fw_resolution;
      opts.iterations = fw_iters;
      opts.tol_gap = fw_tol;
      opts.solver_max_iterations = fw_solver_maxit;
      opts.with_reference = fw_reference ? 1 : 0;
      opts.reference_step = fw_ref_step;
      opts.reference_iterations = fw_ref_iters;
      opts.cache_dir = fw_cache.empty() ? nullptr : fw_cache.c_str();
      LogHandle log;
      const blasso_status st = blasso_run_frank_wolfe(problem.ptr, &opts, &log.ptr);
      if (st != BLASSO_OK) return report_status("baseline failed", st);
      return emit_log(log.ptr, fw_out);
    }

    if (cb->parsed()) {
      if (!cb_config.empty()) {
        const auto kv = read_config(cb_config);
        if (use_config(kv, o_cb_dimension, "dimension"))
          cb_dimension = to_long("dimension", kv.at("dimension"));
        if (use_config(kv, o_cb_samples, "samples"))
          cb_samples = to_long("samples", kv.at("samples"));
        if (use_config(kv, o_cb_seed, "seed"))
          cb_seed = to_long("seed", kv.at("seed"));
      }
      if (cb_dimension < 0 || cb_dimension > 2)
        throw ConfigError("dimension must be 1 or 2 (or 0 for both)");
      if (cb_samples < 1) throw ConfigError("need at least one sample");
      if (cb_seed < 0) throw ConfigError("seed must be non-negative");
      bool dominated = true;
      for (int dim = 1; dim <= 2; ++dim) {
        if (cb_dimension != 0 && cb_dimension != dim) continue;
        blasso_bound_report rep;
        const blasso_status st = blasso_check_bounds(
            dim, static_cast<int>(cb_samples),
            static_cast<unsigned long long>(cb_seed), &rep);
        if (st != BLASSO_OK) return report_status("bound audit failed", st);
        std::printf("dimension %d samples %d seed %ld\n", dim, rep.samples,
                    cb_seed);
        std::printf("upper_violation_order1 %.6e\n", rep.upper_violation[0]);
        std::printf("upper_violation_order2 %.6e\n", rep.upper_violation[1]);
        std::printf("upper_violation_order3 %.6e\n", rep.upper_violation[2]);
        std::printf("grad_lower_violation_order1 %.6e\n",
                    rep.lower_violation[0]);
        std::printf("grad_lower_violation_order2 %.6e\n",
                    rep.lower_violation[1]);
        std::printf("taylor_gap_violation_order2 %.6e\n",
                    rep.taylor_gap_violation[0]);
        std::printf("taylor_gap_violation_order3 %.6e\n",
                    rep.taylor_gap_violation[1]);
        for (double v : rep.upper_violation) dominated = dominated && v <= 0.0;
        for (double v : rep.lower_violation) dominated = dominated && v <= 0.0;
      }
      if (!dominated) {
        std::fprintf(stderr, "dominance violation detected\n");
        return 1;
      }
      return 0;
    }

    if (ft->parsed()) {
      if (!ft_config.empty()) {
        const auto kv = read_config(ft_config);
        apply_problem_config(kv, ft_pf, ft_problem);
        if (use_config(kv, o_ft_step, "step"))
          ft_step = to_double("step", kv.at("step"));
        if (use_config(kv, o_ft_iters, "iterations"))
          ft_iters = to_long("iterations", kv.at("iterations"));
      }
      ProblemHandle problem;
      build_problem(ft_problem, problem);
      constexpr long kCapacity = 64;
      std::vector<double> weights(kCapacity), locations(kCapacity * 3);
      long count = 0;
      double objective = 0.0;
      const blasso_status st =
          blasso_finetune(problem.ptr, ft_step, ft_iters, kCapacity,
                          weights.data(), locations.data(), &count, &objective);
      if (st != BLASSO_OK) return report_status("fine-tune failed", st);
      const int dim = blasso_problem_dim(problem.ptr);
      std::printf("objective %.8e\n", objective);
      for (long i = 0; i < count && i < kCapacity; ++i) {
        std::printf("atom %.12e", weights[i]);
        for (int d = 0; d < dim; ++d)
          std::printf(" %.12e", locations[i * dim + d]);
        std::printf("\n");
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
