#pragma once

#include <utility>
#include <vector>

#include "scorematch/solvers.hpp"

namespace scorematch {

struct EbicConfig {
  double gamma = 0.5;  // extended-BIC weight, in [0, 1]
  bool refit = false;  // rescore after unregularized refit on the support
};

// Extended BIC:
//   2 * (1/2 theta' Gamma theta - g' theta) + |E| log n + 4 |E| gamma log m,
// which for the Gaussian family reads -2 tr(K) + tr(KKW) + |E| log n +
// 4 |E| gamma log m.  |E| counts unordered off-diagonal support pairs.
double ebic_score(const Estimate& estimate, const QuadraticLoss& loss, int n, int m, double gamma);

// Number of unordered pairs (j,k) with any nonzero pair coordinate.
int support_size(const ParameterVector& theta, double zero_tol = 0.0);

// Unregularized score matching restricted to `support` (pair coordinate ids)
// plus all unpenalized coordinates; everything else is zero.
ParameterVector refit_restricted(const QuadraticLoss& loss, const PenaltySpec& penalty,
                                 const std::vector<int>& support);

struct EbicEntry {
  double lambda = 0.0;
  double score = 0.0;
  int support = 0;
  bool refit_ok = true;  // false when the restricted refit system was singular
};

struct EbicSelection {
  double lambda = 0.0;
  Estimate estimate;
  std::vector<EbicEntry> table;  // descending lambda
};

// Score every candidate and return the minimizer; ties go to the larger
// lambda.  Candidates from an explicit estimate list...
EbicSelection select_lambda_ebic(const std::vector<Estimate>& candidates, const QuadraticLoss& loss,
                                 const PenaltySpec& penalty, int n, const EbicConfig& config);
// ... or from the knots of a solution path.
EbicSelection select_lambda_ebic(const SolutionPath& path, const QuadraticLoss& loss,
                                 const PenaltySpec& penalty, int n, const EbicConfig& config);

// Default log-spaced grid in [lambda_max * min_ratio, lambda_max].
std::vector<double> default_lambda_grid(double lambda_max_value, int points = 50,
                                        double min_ratio = 1e-3);

// Fit a warm-started grid of CD estimates, descending in lambda.
std::vector<Estimate> fit_lambda_grid(const QuadraticLoss& loss, const PenaltySpec& penalty,
                                      const std::vector<double>& lambdas, const CdOptions& opts = {});

}  // namespace scorematch
