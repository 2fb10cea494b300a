#include "gaussian_operator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace blasso {

GaussianOperator make_operator(int dim, Eigen::MatrixXd centers, double sigma,
                               double amplitude) {
  if (dim < 1 || dim >= kMaxDim)
    throw std::invalid_argument("dimension must be 1, 2 or 3");
  if (centers.cols() != dim)
    throw std::invalid_argument("centers must have one column per axis");
  if (centers.rows() < 1) throw std::invalid_argument("at least one center");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("sigma must be positive");
  if (!centers.allFinite()) throw std::invalid_argument("non-finite center");
  if (amplitude <= 0.0) amplitude = 1.0 / (2.0 * std::numbers::pi * sigma);
  if (!std::isfinite(amplitude))
    throw std::invalid_argument("non-finite amplitude");
  return GaussianOperator{dim, std::move(centers), sigma, amplitude};
}

double eval_a(const GaussianOperator& op, int m, const Vec& x) {
  const double d2 = (x.transpose() - op.centers.row(m)).squaredNorm();
  return op.amplitude * std::exp(-d2 / (2.0 * op.sigma * op.sigma));
}

Vec grad_a(const GaussianOperator& op, int m, const Vec& x) {
  const Vec w = x - op.centers.row(m).transpose();
  return -eval_a(op, m, x) / (op.sigma * op.sigma) * w;
}

Mat hess_a(const GaussianOperator& op, int m, const Vec& x) {
  const double s2 = op.sigma * op.sigma;
  const Vec w = x - op.centers.row(m).transpose();
  Mat h = (w * w.transpose()) / (s2 * s2);
  h.diagonal().array() -= 1.0 / s2;
  return eval_a(op, m, x) * h;
}

namespace {

void check_q(const GaussianOperator& op, const Eigen::VectorXd& q) {
  if (q.size() != op.num_measurements())
    throw std::invalid_argument("q must have one entry per measurement");
}

}  // namespace

double certificate(const GaussianOperator& op, const Eigen::VectorXd& q, const Vec& x) {
  check_q(op, q);
  const double inv = 1.0 / (2.0 * op.sigma * op.sigma);
  double s = 0.0;
  for (int m = 0; m < op.num_measurements(); ++m) {
    const double d2 = (x.transpose() - op.centers.row(m)).squaredNorm();
    s += q[m] * std::exp(-d2 * inv);
  }
  return op.amplitude * s;
}

Vec certificate_grad(const GaussianOperator& op, const Eigen::VectorXd& q, const Vec& x) {
  check_q(op, q);
  const double inv = 1.0 / (2.0 * op.sigma * op.sigma);
  Vec g = Vec::Zero(op.dim);
  for (int m = 0; m < op.num_measurements(); ++m) {
    const Vec w = x - op.centers.row(m).transpose();
    g -= q[m] * std::exp(-w.squaredNorm() * inv) * w;
  }
  return op.amplitude / (op.sigma * op.sigma) * g;
}

Mat certificate_hess(const GaussianOperator& op, const Eigen::VectorXd& q, const Vec& x) {
  check_q(op, q);
  const double s2 = op.sigma * op.sigma;
  Mat h = Mat::Zero(op.dim, op.dim);
  double trace_shift = 0.0;
  for (int m = 0; m < op.num_measurements(); ++m) {
    const Vec w = x - op.centers.row(m).transpose();
    const double a = q[m] * std::exp(-w.squaredNorm() / (2.0 * s2));
    h += (a / (s2 * s2)) * (w * w.transpose());
    trace_shift += a / s2;
  }
  h.diagonal().array() -= trace_shift;
  return op.amplitude * h;
}

Eigen::VectorXd forward(const GaussianOperator& op, const Measure& mu) {
  if (mu.weights.size() != mu.locations.size())
    throw std::invalid_argument("weights/locations size mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(op.num_measurements());
  for (std::size_t n = 0; n < mu.weights.size(); ++n) {
    if (mu.locations[n].size() != op.dim)
      throw std::invalid_argument("atom dimension mismatch");
    for (int m = 0; m < op.num_measurements(); ++m)
      y[m] += mu.weights[n] * eval_a(op, m, mu.locations[n]);
  }
  return y;
}

double envelope_bound(const GaussianOperator& op, int m, int order,
                      const DyadicCell& cell) {
  if (order < 1 || order > 3) throw std::invalid_argument("order must be 1..3");
  const double s2 = op.sigma * op.sigma;
  const double d = dist_point_cell(op.centers.row(m).transpose(), cell);
  const double r = d + cell_diameter(cell);
  const double rho = op.amplitude * std::exp(-d * d / (2.0 * s2));
  switch (order) {
    case 1: return rho * r / s2;
    case 2: return rho / (s2 * s2) * std::max(s2, r * r);
    default: return rho / (s2 * s2 * s2) * (r * r * r + 3.0 * s2 * r);
  }
}

namespace {

double kappa_cell(const GaussianOperator& op, const Eigen::VectorXd& q,
                  const DyadicCell& cell, int order) {
  check_q(op, q);
  if (cell.dim() != op.dim) throw std::invalid_argument("dimension mismatch");
  double s = 0.0;
  for (int m = 0; m < op.num_measurements(); ++m)
    s += std::abs(q[m]) * envelope_bound(op, m, order, cell);
  return s;
}

}  // namespace

double kappa1_cell(const GaussianOperator& op, const Eigen::VectorXd& q,
                   const DyadicCell& cell) {
  return kappa_cell(op, q, cell, 1);
}

double kappa2_cell(const GaussianOperator& op, const Eigen::VectorXd& q,
                   const DyadicCell& cell) {
  return kappa_cell(op, q, cell, 2);
}

double kappa3_cell(const GaussianOperator& op, const Eigen::VectorXd& q,
                   const DyadicCell& cell) {
  return kappa_cell(op, q, cell, 3);
}

double kappa_global(const GaussianOperator& op, int order) {
  DyadicCell domain{0, std::vector<std::int64_t>(op.dim, 0)};
  double worst = 0.0;
  for (int m = 0; m < op.num_measurements(); ++m)
    worst = std::max(worst, envelope_bound(op, m, order, domain));
  return std::sqrt(static_cast<double>(op.num_measurements())) * worst;
}

}  // namespace blasso
