#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "scorematch/quadratic_loss.hpp"
#include "scorematch/rng.hpp"
#include "scorematch/simulate.hpp"

namespace scorematch {

// Population quantities of the sparsistency analysis for one truth.
struct TheoryReport {
  double alpha = 0.0;            // incoherence with S = off-diagonal support
  double alpha_with_diag = 0.0;  // variant including diagonal coordinates in S
  double c_gamma_star = 0.0;     // inf-norm of (Gamma*_SS)^-1
  double c_theta_star = 0.0;     // inf-norm of Theta*
  double model_complexity = 0.0; // (4/alpha) c_Gamma* max_j Sigma*_jj (Gaussian only; 0 otherwise)
  std::vector<int> support;      // reduced pair-coordinate ids in S
};

// 4x4 covariance with unit diagonal, sigma_23 = 0, sigma_14 = 2 rho^2 and
// rho elsewhere; its inverse has kappa_14 = 0.
Eigen::MatrixXd meinshausen_sigma(double rho);

// Expected Gamma.  Gaussian: every block equals Sigma* (exact).  Other
// families: Monte Carlo average of the empirical Gamma over mc_samples draws,
// with per-block entrywise standard errors.
struct PopulationGamma {
  QuadraticLoss loss;                      // Gamma*, g*, c* in loss form
  std::vector<Eigen::MatrixXd> block_se;   // empty for exact results
};

PopulationGamma population_gamma(const FamilySpec& family, const TruthSpec& truth,
                                 std::optional<int> mc_samples = std::nullopt, Rng rng = Rng(0));

// 1 - |||Gamma*_{S^c S} (Gamma*_SS)^{-1}|||_inf for a support of reduced
// coordinate ids; blocks are handled independently (Gamma* block-diagonal).
double irrepresentability_alpha(const QuadraticLoss& gamma_star, const std::vector<int>& support);

// Support sets (reduced coordinate ids) from a truth interaction matrix.
std::vector<int> support_coords_offdiag(const QuadraticLoss& gamma_star, const Eigen::MatrixXd& theta,
                                        double zero_tol = 0.0);
std::vector<int> support_coords_with_diag(const QuadraticLoss& gamma_star, const Eigen::MatrixXd& theta,
                                          double zero_tol = 0.0);

double c_gamma_star(const QuadraticLoss& gamma_star, const std::vector<int>& support);

TheoryReport theory_constants(const QuadraticLoss& gamma_star, const Eigen::MatrixXd& theta_star,
                              const std::vector<int>& support);
TheoryReport theory_constants(const TruthSpec& truth);

// True iff the off-diagonal supports coincide (|estimate| > zero_tol against
// the exactly-sparse truth) and the signs agree on the support.
bool signed_support_match(const ParameterVector& estimate, const ParameterVector& truth,
                          double zero_tol = 1e-6);
bool signed_support_match(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
                          double zero_tol = 1e-6);

}  // namespace scorematch
