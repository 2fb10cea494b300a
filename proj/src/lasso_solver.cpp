#include "lasso_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace blasso {

namespace {

Eigen::MatrixXd assemble(const GaussianOperator& op, const PointSet& vertices) {
  const int M = op.num_measurements();
  const auto N = static_cast<Eigen::Index>(vertices.points.size());
  Eigen::MatrixXd G(M, N);
  for (Eigen::Index j = 0; j < N; ++j)
    for (int m = 0; m < M; ++m) G(m, j) = eval_a(op, m, vertices.points[j]);
  return G;
}

double objective(const Eigen::MatrixXd& G, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& alpha) {
  return alpha.lpNorm<1>() + 0.5 * (G * alpha - y).squaredNorm();
}

// Duality gap of the feasibility-rescaled dual of alpha's residual.
double gap_of(const Eigen::MatrixXd& G, const Eigen::VectorXd& y,
              const Eigen::VectorXd& alpha, double* feas = nullptr) {
  const Eigen::VectorXd q = y - G * alpha;
  const double s = (G.transpose() * q).lpNorm<Eigen::Infinity>();
  if (feas) *feas = std::max(0.0, s - 1.0);
  const Eigen::VectorXd qt = q / std::max(1.0, s);
  return objective(G, y, alpha) - (qt.dot(y) - 0.5 * qt.squaredNorm());
}

// Largest squared singular value of G via power iteration on G^T G, padded for
// use as a gradient Lipschitz constant.
double lipschitz_estimate(const Eigen::MatrixXd& G) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(G.cols());
  for (Eigen::Index i = 0; i < G.cols(); ++i) v[i] += 1e-3 * ((i % 7) + 1);
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd w = G.transpose() * (G * v);
    const double nl = w.norm();
    if (nl == 0.0) return 1.0;
    w /= nl;
    if (std::abs(nl - lam) <= 1e-12 * nl && it > 8) {
      lam = nl;
      break;
    }
    lam = nl;
    v = w;
  }
  return 1.05 * lam;
}

using VecX = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using MatX = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Exact solve of the discretized problem restricted to a small support by a
// primal-dual active-set loop: enforce G_j^T q = sign_j on the active columns,
// add the most violated off-set column, and resolve sign inconsistencies by an
// exact line search toward the last consistent point (dropping the blocking
// column). Near-duplicate columns push the restricted Gram's conditioning to
// ~1e15, so the stationarity systems are solved in extended precision with
// iterative refinement; the flat-direction ambiguity this leaves does not
// touch the residual q. Returns the best candidate found (empty if none).
Eigen::VectorXd polish_candidate(const Eigen::MatrixXd& G,
                                 const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& alpha, double tol) {
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < alpha.size(); ++j)
    if (alpha[j] != 0.0) active.push_back(j);
  if (active.empty()) return {};
  const auto cap = static_cast<std::size_t>(2 * G.rows());
  if (active.size() > cap) {
    std::nth_element(active.begin(), active.begin() + cap, active.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return std::abs(alpha[a]) > std::abs(alpha[b]);
                     });
    active.resize(cap);
  }
  std::vector<double> sg, href;
  for (Eigen::Index j : active) {
    sg.push_back(alpha[j] > 0.0 ? 1.0 : -1.0);
    href.push_back(alpha[j]);
  }
  std::vector<char> banned(static_cast<std::size_t>(alpha.size()), 0);
  Eigen::Index last_added = -1;
  Eigen::VectorXd best;
  double best_gap = std::numeric_limits<double>::infinity();
  const VecX y_x = y.cast<long double>();

  for (int round = 0; round < 120; ++round) {
    if (active.empty()) return best;
    const auto S = static_cast<Eigen::Index>(active.size());
    MatX Gs(G.rows(), S);
    VecX sgv(S);
    for (Eigen::Index i = 0; i < S; ++i) {
      Gs.col(i) = G.col(active[i]).cast<long double>();
      sgv[i] = static_cast<long double>(sg[i]);
    }
    const MatX gram = Gs.transpose() * Gs;
    const VecX rhs = Gs.transpose() * y_x - sgv;
    Eigen::PartialPivLU<MatX> lu(gram);
    VecX hx = lu.solve(rhs);
    hx += lu.solve(rhs - gram * hx);
    hx += lu.solve(rhs - gram * hx);
    if (!hx.allFinite()) return best;
    std::vector<Eigen::Index> bad;
    for (Eigen::Index i = 0; i < S; ++i)
      if (static_cast<double>(hx[i]) * sg[i] <= 0.0) bad.push_back(i);
    if (!bad.empty()) {
      double theta = 1.0;
      Eigen::Index blk = bad.front();
      for (Eigen::Index i : bad) {
        const double dh = href[i] - static_cast<double>(hx[i]);
        const double tt = dh != 0.0 ? href[i] / dh : 0.0;
        if (tt < theta) {
          theta = tt;
          blk = i;
        }
      }
      for (Eigen::Index i = 0; i < S; ++i)
        href[i] += theta * (static_cast<double>(hx[i]) - href[i]);
      if (active[blk] == last_added) banned[active[blk]] = 1;
      active.erase(active.begin() + blk);
      sg.erase(sg.begin() + blk);
      href.erase(href.begin() + blk);
      continue;
    }
    for (Eigen::Index i = 0; i < S; ++i) href[i] = static_cast<double>(hx[i]);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(alpha.size());
    for (Eigen::Index i = 0; i < S; ++i) out[active[i]] = href[i];
    const double g = gap_of(G, y, out);
    if (g < best_gap) {
      best = out;
      best_gap = g;
    }
    if (g <= 0.5 * tol) return best;
    Eigen::VectorXd q = y;
    for (Eigen::Index i = 0; i < S; ++i) q -= href[i] * G.col(active[i]);
    const Eigen::VectorXd corr = G.transpose() * q;
    Eigen::Index jworst = -1;
    double worst = 1e-12;
    std::vector<char> in_active(static_cast<std::size_t>(alpha.size()), 0);
    for (Eigen::Index j : active) in_active[j] = 1;
    for (Eigen::Index j = 0; j < corr.size(); ++j) {
      if (in_active[j] || banned[j]) continue;
      const double viol = std::abs(corr[j]) - 1.0;
      if (viol > worst) {
        worst = viol;
        jworst = j;
      }
    }
    if (jworst < 0 || active.size() >= cap) return best;
    active.push_back(jworst);
    sg.push_back(corr[jworst] > 0.0 ? 1.0 : -1.0);
    href.push_back(0.0);
    last_added = jworst;
  }
  return best;
}

}  // namespace

DualSolution solve_discretized(const GaussianOperator& op,
                               const Eigen::VectorXd& y,
                               const PointSet& vertices,
                               const SolverOptions& opts,
                               const Eigen::VectorXd* warm_start) {
  if (vertices.points.empty())
    throw std::invalid_argument("vertex set must be nonempty");
  if (vertices.dim != op.dim)
    throw std::invalid_argument("vertex dimension mismatch");
  if (y.size() != op.num_measurements())
    throw std::invalid_argument("data size mismatch");
  if (!y.allFinite()) throw std::invalid_argument("non-finite data");
  if (opts.max_iterations < 1)
    throw std::invalid_argument("max_iterations must be positive");

  const double tol =
      opts.tol_gap > 0.0 ? opts.tol_gap
                         : 1e-9 * std::max(1.0, 0.5 * y.squaredNorm());
  const Eigen::MatrixXd G = assemble(op, vertices);
  const auto N = G.cols();

  DualSolution sol;
  auto finish = [&](const Eigen::VectorXd& alpha, long its) {
    sol.weights = alpha;
    sol.q = y - G * alpha;
    sol.primal = objective(G, y, alpha);
    sol.gap = gap_of(G, y, alpha, &sol.feas_violation);
    sol.iterations = its;
    return sol;
  };

  // alpha = 0 is optimal whenever the data's certificate is already feasible.
  if ((G.transpose() * y).lpNorm<Eigen::Infinity>() <= 1.0)
    return finish(Eigen::VectorXd::Zero(N), 0);

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(N);
  if (warm_start) {
    if (warm_start->size() != N)
      throw std::invalid_argument("warm start size mismatch");
    alpha = *warm_start;
  }

  const double L = lipschitz_estimate(G);
  const double step = 1.0 / L;
  double fo = objective(G, y, alpha);

  // Converged warm starts (or ones whose support already solves the enlarged
  // problem after a polish) skip the iteration loop entirely.
  {
    double gap = gap_of(G, y, alpha);
    if (gap <= tol) return finish(alpha, 0);
    const Eigen::VectorXd cand = polish_candidate(G, y, alpha, tol);
    if (cand.size() == N && gap_of(G, y, cand) < gap) {
      alpha = cand;
      fo = objective(G, y, alpha);
      if (gap_of(G, y, alpha) <= tol) return finish(alpha, 0);
    }
  }

  Eigen::VectorXd beta = alpha, next(N), grad(N);
  double t = 1.0;
  auto forward_step = [&](const Eigen::VectorXd& point) {
    grad.noalias() = G.transpose() * (G * point - y);
    next = point - step * grad;
    next = next.array().sign() * (next.array().abs() - step).max(0.0);
  };

  for (long it = 1; it <= opts.max_iterations; ++it) {
    forward_step(beta);
    double fn = objective(G, y, next);
    if (fn > fo) {  // restart momentum from the last monotone iterate
      beta = alpha;
      t = 1.0;
      forward_step(beta);
      fn = objective(G, y, next);
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    beta = next + ((t - 1.0) / tn) * (next - alpha);
    alpha.swap(next);
    t = tn;
    fo = fn;
    if (opts.objective_trace) opts.objective_trace->push_back(fo);
    if (it % 64 == 0) {
      double gap = gap_of(G, y, alpha);
      if (gap <= tol) return finish(alpha, it);
      const Eigen::VectorXd cand = polish_candidate(G, y, alpha, tol);
      if (cand.size() == N && gap_of(G, y, cand) < gap) {
        alpha = cand;
        fo = objective(G, y, alpha);
        beta = alpha;
        t = 1.0;
        if (gap_of(G, y, alpha) <= tol) return finish(alpha, it);
      }
    }
  }
  finish(alpha, opts.max_iterations);
  if (sol.gap > tol) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "discretized solve: gap %.3e above tolerance %.3e after %ld "
                  "iterations",
                  sol.gap, tol, opts.max_iterations);
    throw ConvergenceError(msg);
  }
  return sol;
}

KktReport check_kkt(const GaussianOperator& op, const PointSet& vertices,
                    const Eigen::VectorXd& y, const DualSolution& sol,
                    double tol) {
  const Eigen::MatrixXd G = assemble(op, vertices);
  KktReport rep;
  const Eigen::VectorXd corr = G.transpose() * sol.q;
  rep.bound_residual = std::max(0.0, corr.lpNorm<Eigen::Infinity>() - 1.0);
  for (Eigen::Index j = 0; j < sol.weights.size(); ++j)
    if (sol.weights[j] != 0.0)
      rep.sign_residual =
          std::max(rep.sign_residual,
                   std::abs(corr[j] - (sol.weights[j] > 0.0 ? 1.0 : -1.0)));
  rep.consistency_residual =
      (sol.q - (y - G * sol.weights)).lpNorm<Eigen::Infinity>();
  rep.pass = rep.bound_residual <= tol && rep.sign_residual <= tol &&
             rep.consistency_residual <= tol;
  return rep;
}

double primal_value(const GaussianOperator& op, const Measure& mu,
                    const Eigen::VectorXd& y) {
  double tv = 0.0;
  for (double w : mu.weights) tv += std::abs(w);
  return tv + 0.5 * (forward(op, mu) - y).squaredNorm();
}

Measure fine_tune(const GaussianOperator& op, const Measure& mu0,
                  const Eigen::VectorXd& y, double step, long iters) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (mu0.weights.size() != mu0.locations.size())
    throw std::invalid_argument("weights/locations size mismatch");
  for (double w : mu0.weights)
    if (w == 0.0)
      throw std::invalid_argument("initial weights must be nonzero");

  Measure mu = mu0;
  const auto n = mu.weights.size();
  for (long it = 0; it < iters; ++it) {
    Eigen::VectorXd resid = forward(op, mu) - y;
    double grad_sq = 0.0;
    std::vector<double> gw(n);
    std::vector<Vec> gx(n);
    for (std::size_t s = 0; s < n; ++s) {
      double corr = 0.0;
      for (int m = 0; m < op.num_measurements(); ++m)
        corr += resid[m] * eval_a(op, m, mu.locations[s]);
      gw[s] = (mu.weights[s] > 0.0 ? 1.0 : -1.0) + corr;
      gx[s] = mu.weights[s] * certificate_grad(op, resid, mu.locations[s]);
      grad_sq += gw[s] * gw[s] + gx[s].squaredNorm();
    }
    if (std::sqrt(grad_sq) < 1e-12) break;
    for (std::size_t s = 0; s < n; ++s) {
      const double w = mu.weights[s] - step * gw[s];
      if (w == 0.0 || (w > 0.0) != (mu.weights[s] > 0.0))
        throw DegeneratePathError(
            "weight crossed zero during descent; retry with a smaller step");
      mu.weights[s] = w;
      mu.locations[s] -= step * gx[s];
      mu.locations[s] = mu.locations[s].cwiseMax(0.0).cwiseMin(1.0);
    }
  }
  return mu;
}

}  // namespace blasso
