// Randomized audit of the certified selection bounds against dense sampling.
//
// For seeded random pairs (q, cell) on the standard 1D/2D measurement setups,
// compares every upper bound (orders 1-3) against a dense-sampling estimate of
// sup |A*q| over the cell, every gradient lower bound against the sampled
// infimum of ||grad A*q||, and the two-sided Taylor inequalities
//   ub_2 - kappa_2 diam^2 <= sup <= ub_2,
//   ub_3 - kappa_3 diam^3 / 3 <= sup <= ub_3.
// Sampling underestimates suprema, so a positive upper_violation is a genuine
// bound failure; taylor_gap values additionally absorb the sampling error of
// the line-search-polished supremum estimate.

#pragma once

#include <cstdint>

namespace blasso {

struct BoundSweepResult {
  double upper_violation[3];     // max over pairs of sampled_sup - ub_{1,2,3}
  double lower_violation[2];     // max over pairs of grad_lb_{1,2} - sampled_inf
  double taylor_gap_violation[2];  // max of (ub - full Taylor gap) - sampled_sup
  int samples = 0;
};

// Runs `samples` random (q, cell) draws in the given dimension (1 or 2): q has
// i.i.d. normal entries scaled by a cycling factor in {0.1, 1, 10}, the cell is
// uniform over levels 0..6 and positions. Deterministic for a fixed seed.
BoundSweepResult bound_sweep(int dim, int samples, std::uint64_t seed);

}  // namespace blasso
