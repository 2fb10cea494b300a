// Tensor-factorized certificate scan and ascent polish.

#include "certificate_scan.hpp"

#include <cmath>
#include <stdexcept>

namespace blasso {

std::vector<double> certificate_grid(const GaussianOperator& op,
                                     const Eigen::VectorXd& q, long n) {
  const int D = op.dim;
  const int M = op.num_measurements();
  if (q.size() != M)
    throw std::invalid_argument("certificate grid: dual size mismatch");
  if (n < 1) throw std::invalid_argument("certificate grid: n must be >= 1");
  if (D < 1 || D > 3)
    throw std::invalid_argument("certificate grid: unsupported dimension");
  const long npts = n + 1;

  std::vector<Eigen::MatrixXd> E(static_cast<std::size_t>(D));
  for (int d = 0; d < D; ++d) {
    E[static_cast<std::size_t>(d)].resize(M, npts);
    for (long i = 0; i < npts; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(n);
      for (int m = 0; m < M; ++m) {
        const double t = x - op.centers(m, d);
        E[static_cast<std::size_t>(d)](m, i) =
            std::exp(-t * t / (2.0 * op.sigma * op.sigma));
      }
    }
  }
  long total = 1;
  for (int d = 0; d < D; ++d) total *= npts;
  std::vector<double> vals(static_cast<std::size_t>(total));
  if (D == 1) {
    Eigen::Map<Eigen::VectorXd>(vals.data(), npts) = E[0].transpose() * q;
  } else if (D == 2) {
    Eigen::Map<Eigen::MatrixXd> V(vals.data(), npts, npts);
    V = (E[0].transpose() * (q.asDiagonal() * E[1])).eval();
  } else {
    for (long i2 = 0; i2 < npts; ++i2) {
      const Eigen::VectorXd s = q.cwiseProduct(E[2].col(i2));
      Eigen::Map<Eigen::MatrixXd> V(vals.data() + i2 * npts * npts, npts, npts);
      V = (E[0].transpose() * (s.asDiagonal() * E[1])).eval();
    }
  }
  for (double& v : vals) v *= op.amplitude;
  return vals;
}

Vec ascent_polish(const GaussianOperator& op, const Eigen::VectorXd& q, Vec x,
                  int steps) {
  const double step = op.sigma * op.sigma / 4.0;
  double value = std::abs(certificate(op, q, x));
  for (int it = 0; it < steps; ++it) {
    const double s = certificate(op, q, x) >= 0.0 ? 1.0 : -1.0;
    const Vec dir = s * certificate_grad(op, q, x);
    // Backtrack until |A*q| does not decrease; keeps the polish monotone even
    // when the certificate is steep and the nominal step overshoots.
    double t = step;
    bool moved = false;
    for (int half = 0; half < 40; ++half) {
      Vec trial = (x + t * dir).cwiseMax(0.0).cwiseMin(1.0);
      const double trial_value = std::abs(certificate(op, q, trial));
      if (trial_value >= value) {
        x = std::move(trial);
        value = trial_value;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

}  // namespace blasso
