#pragma once

// Test-only oracle: evaluates the (non-negative) scoring rule by central
// finite differences of a closed-form log-density, independently of the
// quadratic-loss assembly it is used to check.

#include <Eigen/Core>
#include <functional>

namespace oracle {

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

inline double partial(const LogDensity& f, Eigen::VectorXd x, int j, double h) {
  const double xj = x[j];
  x[j] = xj + h;
  const double up = f(x);
  x[j] = xj - h;
  const double down = f(x);
  return (up - down) / (2 * h);
}

inline double second_partial(const LogDensity& f, Eigen::VectorXd x, int j, double h) {
  const double xj = x[j];
  const double mid = f(x);
  x[j] = xj + h;
  const double up = f(x);
  x[j] = xj - h;
  const double down = f(x);
  return (up - 2 * mid + down) / (h * h);
}

// Hyvarinen scoring rule S(x, q) = lap log q + 1/2 |grad log q|^2.
inline double scoring_rule(const LogDensity& logq, const Eigen::VectorXd& x) {
  double s = 0;
  for (int j = 0; j < x.size(); ++j) {
    const double h = 1e-4 * std::max(1.0, std::abs(x[j]));
    const double d1 = partial(logq, x, j, h);
    const double d2 = second_partial(logq, x, j, h);
    s += d2 + 0.5 * d1 * d1;
  }
  return s;
}

// Non-negative variant with the x_j / x_j^2 weightings.
inline double scoring_rule_nonneg(const LogDensity& logq, const Eigen::VectorXd& x) {
  double s = 0;
  for (int j = 0; j < x.size(); ++j) {
    const double h = 1e-4 * std::max(1.0, std::abs(x[j]));
    const double d1 = partial(logq, x, j, h);
    const double d2 = second_partial(logq, x, j, h);
    s += 2.0 * x[j] * d1 + x[j] * x[j] * d2 + 0.5 * x[j] * x[j] * d1 * d1;
  }
  return s;
}

inline double empirical_loss(const LogDensity& logq, const Eigen::MatrixXd& data, bool nonneg) {
  double total = 0;
  for (int i = 0; i < data.rows(); ++i) {
    const Eigen::VectorXd xi = data.row(i).transpose();
    total += nonneg ? scoring_rule_nonneg(logq, xi) : scoring_rule(logq, xi);
  }
  return total / data.rows();
}

}  // namespace oracle
