// Certified candidate-cell selection on dual certificates.
//
// Given a dual vector q, each rule computes for a cell w a certified upper
// bound of sup_w |A*q| from a Taylor expansion at the cell corners plus a
// kappa remainder envelope of matching order, and optionally a certified
// lower bound of inf_w ||grad A*q||_2. A leaf is a candidate when its upper
// bound reaches the unit threshold (ties included) and, under a gradient
// filter, its gradient lower bound cannot exclude a critical point (<= 0).
// The order-3 bound and the order-2 gradient bound require exact extrema of
// quadratics over boxes; those are found by enumerating all 3^D faces of the
// box and solving each face's linear stationarity system (D <= 3).

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gaussian_operator.hpp"
#include "geometry.hpp"
#include "types.hpp"

namespace blasso {

enum class BoundOrder { First, Second, Third };
enum class GradientFilter { None, FirstOrderGrad, SecondOrderGrad };
enum class KappaMode { LocalCell, GlobalTimesNorm };

struct SelectionRule {
  BoundOrder order = BoundOrder::Second;
  GradientFilter gradient_filter = GradientFilter::None;
  KappaMode kappa_mode = KappaMode::LocalCell;
};

struct CandidateSet {
  std::vector<DyadicCell> cells;
  std::vector<double> bound_values;  // upper bounds, aligned with cells
};

// Remainder constant of the given derivative order: the per-cell weighted
// envelope sum, or the domain-wide constant times ||q||_2.
double kappa_for(const GaussianOperator& op, const Eigen::VectorXd& q,
                 const DyadicCell& cell, int order, KappaMode mode);

// min over corners v of |A*q(v)|, plus kappa_1 diam(w).
double ub_first_order(const GaussianOperator& op, const Eigen::VectorXd& q,
                      const DyadicCell& cell,
                      KappaMode mode = KappaMode::LocalCell);

// min over corners v of max over corners x of
//   |A*q(v) + <grad A*q(v), x - v>| + kappa_2/2 ||x - v||^2
// (the inner objective is convex in x, so corner evaluation is exact).
double ub_second_order(const GaussianOperator& op, const Eigen::VectorXd& q,
                       const DyadicCell& cell,
                       KappaMode mode = KappaMode::LocalCell);

// min over corners v of the exact box maximum of the second-order Taylor
// model |A*q(v) + <g, u> + u^T H u / 2|, plus kappa_3 diam^3 / 6.
double ub_third_order(const GaussianOperator& op, const Eigen::VectorXd& q,
                      const DyadicCell& cell,
                      KappaMode mode = KappaMode::LocalCell);

// max over corners v of ||grad A*q(v)||_2, minus kappa_2 diam(w).
double grad_lb_first(const GaussianOperator& op, const Eigen::VectorXd& q,
                     const DyadicCell& cell,
                     KappaMode mode = KappaMode::LocalCell);

// max over corners v of the exact box minimum of ||g + H u||_2, minus
// kappa_3 diam^2 / 2.
double grad_lb_second(const GaussianOperator& op, const Eigen::VectorXd& q,
                      const DyadicCell& cell,
                      KappaMode mode = KappaMode::LocalCell);

// Exact max of |c + g^T u + u^T H u / 2| over the box {lo <= u <= hi}
// (componentwise), H symmetric, D <= 3. Candidates: the 2^D box corners and,
// for every face, the in-face solution of the restricted stationarity system
// (singular faces contribute none; their extrema lie on subfaces).
double max_abs_quadratic_on_box(double c, const Vec& g, const Mat& H,
                                const Vec& lo, const Vec& hi);

// Exact min of ||g + H u||_2 over the box, by the same face enumeration
// applied to the convex quadratic ||g + H u||^2.
double min_norm_affine_on_box(const Vec& g, const Mat& H, const Vec& lo,
                              const Vec& hi);

// All leaves whose upper bound (per rule.order) is >= 1, further restricted,
// when a gradient filter is set, to leaves whose gradient lower bound is
// <= 0. Cells come back in the partition's deterministic leaf order.
CandidateSet select_candidates(const GaussianOperator& op,
                               const Partition& partition,
                               const Eigen::VectorXd& q,
                               const SelectionRule& rule);

}  // namespace blasso
