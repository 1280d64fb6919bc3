#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "scorematch/penalty.hpp"
#include "scorematch/quadratic_loss.hpp"

namespace scorematch {

inline double soft_threshold(double a, double b) {
  if (a > b) return a - b;
  if (a < -b) return a + b;
  return 0.0;
}

struct Estimate {
  ParameterVector theta;
  double lambda = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = true;
};

enum class PathTermination { GradientZero, RankLimit, UserLambdaMin };

// Piecewise-linear solution path: theta(lambda) = theta(knot r) +
// (lambda - knot r) * slope r on [knot r, knot r+1], constant above the top
// knot (= lambda_max).
class SolutionPath {
 public:
  LayoutPtr layout;
  std::vector<double> knots;                  // ascending
  std::vector<Eigen::VectorXd> coefficients;  // reduced coordinates at knots
  std::vector<Eigen::VectorXd> slopes;        // one per segment
  std::vector<std::vector<int>> active_sets;  // penalized support per segment
  PathTermination termination = PathTermination::GradientZero;

  double lambda_max() const { return knots.back(); }
  double lambda_min() const { return knots.front(); }
  std::size_t num_segments() const { return slopes.size(); }
  // Interpolated coefficients; lambda above the top knot clamps to the top
  // solution, lambda below the bottom knot is an error.
  Eigen::VectorXd at(double lambda) const;
};

struct PathStop {
  double lambda_min = 0.0;
  int max_active = 0;  // 0 = no explicit cap (numerical rank still guards)
};

struct CdOptions {
  double tol = 1e-8;  // l1-change threshold on the full vectorized parameter
  int t_max = 10000;
  std::optional<Eigen::VectorXd> warm_start;  // reduced coordinates
};

// Smallest lambda at which every penalized coordinate is zero, with the
// unpenalized coordinates solved exactly.
double lambda_max(const QuadraticLoss& loss, const PenaltySpec& penalty);

// Solve Q_CC u_C = b_C for the reduced Hessian restricted to `coords`,
// leaving all other coordinates at zero.  Throws RankError when the
// restricted system is numerically singular.
Eigen::VectorXd solve_restricted_system(const QuadraticLoss& loss, const std::vector<int>& coords);

// LARS-style homotopy over the l1-penalized coordinates (group mode is not
// piecewise linear and is rejected).
SolutionPath solve_path(const QuadraticLoss& loss, const PenaltySpec& penalty, const PathStop& stop = {});

// Cyclic coordinate descent; penalized coordinates use soft-thresholding.
Estimate solve_cd(const QuadraticLoss& loss, const PenaltySpec& penalty, double lambda,
                  const CdOptions& opts = {});

// Gaussian specialization operating directly on W and the precision matrix.
Estimate solve_cd_gaussian(const Eigen::MatrixXd& w, double lambda, const CdOptions& opts = {});

// Exact block-coordinate descent for group penalties with groups of size <= 2.
Estimate solve_group_cd(const QuadraticLoss& loss, const PenaltySpec& penalty, double lambda,
                        const CdOptions& opts = {});

// Maximum violation of the stationarity/subgradient optimality conditions.
double kkt_residual(const QuadraticLoss& loss, const PenaltySpec& penalty, const ParameterVector& theta,
                    double lambda);
double kkt_residual_reduced(const QuadraticLoss& loss, const PenaltySpec& penalty,
                            const Eigen::VectorXd& u, double lambda);

}  // namespace scorematch
