// Gaussian measurement operator and certified derivative envelopes.
//
// The operator maps a measure mu on [0,1]^D to the M samples
//   (A mu)[m] = integral a_m dmu,    a_m(x) = amp * exp(-||x - z_m||^2 / (2 sigma^2)),
// with a common width sigma and peak amplitude amp (default 1/(2 pi sigma)).
// The adjoint applied to q in R^M is the certificate
//   (A* q)(x) = sum_m q[m] a_m(x).
//
// For a dyadic cell w the per-measurement envelopes below dominate the
// derivative tensors of a_m uniformly on w. With d = dist(z_m, w),
// r = d + diam(w) and rho(d) = amp * exp(-d^2/(2 sigma^2)):
//   order 1:  rho(d) * r / sigma^2                      >= sup_w ||a_m'||_2
//   order 2:  rho(d) / sigma^4 * max(sigma^2, r^2)      >= sup_w ||a_m''||_{2->2}
//   order 3:  rho(d) / sigma^6 * (r^3 + 3 sigma^2 r)    >= sup_w ||a_m'''||
// (third-order norm = trilinear operator norm). kappaN_cell sums them against
// |q|; kappa_global(r) bounds sup over the whole domain and unit ||q||_2.

#pragma once

#include <Eigen/Dense>

#include "geometry.hpp"
#include "types.hpp"

namespace blasso {

struct GaussianOperator {
  int dim = 0;
  Eigen::MatrixXd centers;  // M x D, one row per measurement
  double sigma = 0.0;
  double amplitude = 0.0;

  int num_measurements() const { return static_cast<int>(centers.rows()); }
};

// amplitude <= 0 selects the default 1/(2 pi sigma).
GaussianOperator make_operator(int dim, Eigen::MatrixXd centers, double sigma,
                               double amplitude = 0.0);

double eval_a(const GaussianOperator& op, int m, const Vec& x);
Vec grad_a(const GaussianOperator& op, int m, const Vec& x);
Mat hess_a(const GaussianOperator& op, int m, const Vec& x);

double certificate(const GaussianOperator& op, const Eigen::VectorXd& q, const Vec& x);
Vec certificate_grad(const GaussianOperator& op, const Eigen::VectorXd& q, const Vec& x);
Mat certificate_hess(const GaussianOperator& op, const Eigen::VectorXd& q, const Vec& x);

// y[m] = sum_n weights[n] * a_m(locations[n]).
Eigen::VectorXd forward(const GaussianOperator& op, const Measure& mu);

// Per-measurement envelope of the given derivative order (1, 2 or 3) on a cell.
double envelope_bound(const GaussianOperator& op, int m, int order,
                      const DyadicCell& cell);

// sum_m |q[m]| * envelope_bound(m, order, cell).
double kappa1_cell(const GaussianOperator& op, const Eigen::VectorXd& q,
                   const DyadicCell& cell);
double kappa2_cell(const GaussianOperator& op, const Eigen::VectorXd& q,
                   const DyadicCell& cell);
double kappa3_cell(const GaussianOperator& op, const Eigen::VectorXd& q,
                   const DyadicCell& cell);

// Domain-wide bound: sqrt(M) * max_m envelope_bound(m, order, [0,1]^D), valid
// for any certificate with ||q||_2 <= 1.
double kappa_global(const GaussianOperator& op, int order);

}  // namespace blasso
