// Shared small types for the measure-recovery core.
//
// Spatial dimension is a runtime value D in {1,2,3}; Vec/Mat are Eigen types
// with a compile-time size cap so points, gradients and Hessians stay on the
// stack.

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace blasso {

constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                          Eigen::ColMajor, kMaxDim, kMaxDim>;

// Refinement depth overflow (dyadic level cap).
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iteration budget exhausted before reaching the requested tolerance.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A weight crossed zero during parameter-space descent; the path is no longer
// differentiable and the caller should restart with a smaller step.
struct DegeneratePathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Finite set of points in [0,1]^D.
struct PointSet {
  int dim = 0;
  std::vector<Vec> points;
};

// Weighted Dirac atoms (weights[i] at locations[i]).
struct Measure {
  std::vector<double> weights;
  std::vector<Vec> locations;
};

}  // namespace blasso
