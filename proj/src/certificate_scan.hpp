// Uniform-grid certificate evaluation and local ascent polish.
//
// On the tensor grid {0, 1/n, ..., 1}^D the certificate A*q factors per axis,
// so the full scan reduces to one Gaussian factor table per axis and small
// matrix products -- linear in M * n per axis instead of per point. Values
// are laid out with axis 0 fastest: index = (...(i_{D-1} n' + i_{D-2})...) n'
// + i_0 with n' = n+1 points per axis.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gaussian_operator.hpp"
#include "types.hpp"

namespace blasso {

std::vector<double> certificate_grid(const GaussianOperator& op,
                                     const Eigen::VectorXd& q, long n);

// Projected gradient ascent on |A*q| over [0,1]^D: sign-corrected direction,
// base step sigma^2/4 halved until the value does not decrease, stopping when
// no such step exists. Monotone sharpening of scan maxima; not certified.
Vec ascent_polish(const GaussianOperator& op, const Eigen::VectorXd& q, Vec x,
                  int steps);

}  // namespace blasso
