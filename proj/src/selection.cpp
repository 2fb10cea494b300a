// Selection bounds: Taylor models at cell corners + kappa envelopes, and the
// exact box extrema of quadratics they require (3^D face enumeration).

#include "selection.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace blasso {

namespace {

// Corners of {lo <= u <= hi} plus, for every face (each axis fixed low, fixed
// high, or free), the in-face stationary point of the quadratic with Hessian
// A and gradient b + A u. Singular face systems are skipped: their extrema
// are attained on subfaces, which the enumeration also visits.
std::vector<Vec> box_stationary_candidates(const Mat& A, const Vec& b,
                                           const Vec& lo, const Vec& hi) {
  const auto D = static_cast<int>(lo.size());
  if (D > 3) throw std::invalid_argument("box extrema: dimension > 3");
  std::vector<Vec> out;
  for (int mask = 0; mask < (1 << D); ++mask) {
    Vec u(D);
    for (int i = 0; i < D; ++i) u[i] = (mask >> i) & 1 ? hi[i] : lo[i];
    out.push_back(u);
  }
  int pow3 = 1;
  for (int i = 0; i < D; ++i) pow3 *= 3;
  for (int code = 0; code < pow3; ++code) {
    int digits[3] = {0, 0, 0};
    int c = code;
    for (int i = 0; i < D; ++i) {
      digits[i] = c % 3;
      c /= 3;
    }
    std::vector<int> free_idx;
    Vec u = lo;
    for (int i = 0; i < D; ++i) {
      if (digits[i] == 2)
        free_idx.push_back(i);
      else
        u[i] = digits[i] == 1 ? hi[i] : lo[i];
    }
    const auto F = static_cast<int>(free_idx.size());
    if (F == 0) continue;  // corners already listed
    Mat aff(F, F);
    Vec rhs(F);
    for (int r = 0; r < F; ++r) {
      rhs[r] = -b[free_idx[r]];
      for (int i = 0; i < D; ++i) {
        if (digits[i] != 2) rhs[r] -= A(free_idx[r], i) * u[i];
      }
      for (int s = 0; s < F; ++s) aff(r, s) = A(free_idx[r], free_idx[s]);
    }
    Eigen::FullPivLU<Mat> lu(aff);
    if (!lu.isInvertible()) continue;
    const Vec sol = lu.solve(rhs);
    bool inside = true;
    for (int r = 0; r < F; ++r)
      if (sol[r] < lo[free_idx[r]] || sol[r] > hi[free_idx[r]]) inside = false;
    if (!inside) continue;
    for (int r = 0; r < F; ++r) u[free_idx[r]] = sol[r];
    out.push_back(u);
  }
  return out;
}

// The box w - v for a corner v of w, as componentwise bounds.
void relative_box(const DyadicCell& cell, const Vec& v, Vec& lo, Vec& hi) {
  const Vec corner = lower_corner(cell);
  const double h = edge_length(cell);
  lo = corner - v;
  hi = lo.array() + h;
}

}  // namespace

double kappa_for(const GaussianOperator& op, const Eigen::VectorXd& q,
                 const DyadicCell& cell, int order, KappaMode mode) {
  if (mode == KappaMode::GlobalTimesNorm)
    return kappa_global(op, order) * q.norm();
  switch (order) {
    case 1:
      return kappa1_cell(op, q, cell);
    case 2:
      return kappa2_cell(op, q, cell);
    default:
      return kappa3_cell(op, q, cell);
  }
}

double ub_first_order(const GaussianOperator& op, const Eigen::VectorXd& q,
                      const DyadicCell& cell, KappaMode mode) {
  const PointSet verts = cell_vertices(cell);
  double cmin = std::numeric_limits<double>::infinity();
  for (const Vec& v : verts.points)
    cmin = std::min(cmin, std::abs(certificate(op, q, v)));
  return cmin + kappa_for(op, q, cell, 1, mode) * cell_diameter(cell);
}

double ub_second_order(const GaussianOperator& op, const Eigen::VectorXd& q,
                       const DyadicCell& cell, KappaMode mode) {
  const PointSet verts = cell_vertices(cell);
  const double k2 = kappa_for(op, q, cell, 2, mode);
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& v : verts.points) {
    const double c = certificate(op, q, v);
    const Vec g = certificate_grad(op, q, v);
    double inner = 0.0;
    for (const Vec& x : verts.points) {
      const Vec u = x - v;
      inner = std::max(inner,
                       std::abs(c + g.dot(u)) + 0.5 * k2 * u.squaredNorm());
    }
    best = std::min(best, inner);
  }
  return best;
}

double ub_third_order(const GaussianOperator& op, const Eigen::VectorXd& q,
                      const DyadicCell& cell, KappaMode mode) {
  const PointSet verts = cell_vertices(cell);
  const double k3 = kappa_for(op, q, cell, 3, mode);
  const double diam = cell_diameter(cell);
  double best = std::numeric_limits<double>::infinity();
  Vec lo, hi;
  for (const Vec& v : verts.points) {
    const double c = certificate(op, q, v);
    const Vec g = certificate_grad(op, q, v);
    const Mat H = certificate_hess(op, q, v);
    relative_box(cell, v, lo, hi);
    best = std::min(best, max_abs_quadratic_on_box(c, g, H, lo, hi));
  }
  return best + k3 * diam * diam * diam / 6.0;
}

double grad_lb_first(const GaussianOperator& op, const Eigen::VectorXd& q,
                     const DyadicCell& cell, KappaMode mode) {
  const PointSet verts = cell_vertices(cell);
  double gmax = 0.0;
  for (const Vec& v : verts.points)
    gmax = std::max(gmax, certificate_grad(op, q, v).norm());
  return gmax - kappa_for(op, q, cell, 2, mode) * cell_diameter(cell);
}

double grad_lb_second(const GaussianOperator& op, const Eigen::VectorXd& q,
                      const DyadicCell& cell, KappaMode mode) {
  const PointSet verts = cell_vertices(cell);
  const double k3 = kappa_for(op, q, cell, 3, mode);
  const double diam = cell_diameter(cell);
  double best = 0.0;
  Vec lo, hi;
  for (const Vec& v : verts.points) {
    const Vec g = certificate_grad(op, q, v);
    const Mat H = certificate_hess(op, q, v);
    relative_box(cell, v, lo, hi);
    best = std::max(best, min_norm_affine_on_box(g, H, lo, hi));
  }
  return best - 0.5 * k3 * diam * diam;
}

double max_abs_quadratic_on_box(double c, const Vec& g, const Mat& H,
                                const Vec& lo, const Vec& hi) {
  double best = 0.0;
  for (const Vec& u : box_stationary_candidates(H, g, lo, hi))
    best = std::max(best, std::abs(c + g.dot(u) + 0.5 * u.dot(H * u)));
  return best;
}

double min_norm_affine_on_box(const Vec& g, const Mat& H, const Vec& lo,
                              const Vec& hi) {
  // ||g + H u||^2 / 2 has Hessian H^T H and gradient H^T g + H^T H u.
  const Mat A = H.transpose() * H;
  const Vec b = H.transpose() * g;
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& u : box_stationary_candidates(A, b, lo, hi))
    best = std::min(best, (g + H * u).norm());
  return best;
}

CandidateSet select_candidates(const GaussianOperator& op,
                               const Partition& partition,
                               const Eigen::VectorXd& q,
                               const SelectionRule& rule) {
  CandidateSet out;
  for (const DyadicCell& cell : partition.leaves) {
    double ub = 0.0;
    switch (rule.order) {
      case BoundOrder::First:
        ub = ub_first_order(op, q, cell, rule.kappa_mode);
        break;
      case BoundOrder::Second:
        ub = ub_second_order(op, q, cell, rule.kappa_mode);
        break;
      case BoundOrder::Third:
        ub = ub_third_order(op, q, cell, rule.kappa_mode);
        break;
    }
    if (ub < 1.0) continue;
    if (rule.gradient_filter == GradientFilter::FirstOrderGrad &&
        grad_lb_first(op, q, cell, rule.kappa_mode) > 0.0)
      continue;
    if (rule.gradient_filter == GradientFilter::SecondOrderGrad &&
        grad_lb_second(op, q, cell, rule.kappa_mode) > 0.0)
      continue;
    out.cells.push_back(cell);
    out.bound_values.push_back(ub);
  }
  return out;
}

}  // namespace blasso
