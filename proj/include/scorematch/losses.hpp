#pragma once

#include <Eigen/Core>
#include <functional>

#include "scorematch/data_matrix.hpp"
#include "scorematch/quadratic_loss.hpp"

namespace scorematch {

enum class Family {
  GaussianCentered,
  TruncatedGaussianCentered,
  TruncatedGaussianLocation,
  NormalConditionals,
};

enum class Domain { RealLine, NonnegativeOrthant };

struct FamilySpec {
  Family kind = Family::GaussianCentered;
  Domain domain = Domain::RealLine;

  static FamilySpec make(Family kind);
};

Domain family_domain(Family kind);
const char* family_name(Family kind);
Family family_from_name(const std::string& name);

// W = (1/n) sum_i x_i x_i', no mean subtraction.
Eigen::MatrixXd sample_covariance(const DataMatrix& x);

// Centered Gaussian family, q(x|K) ~ exp(-x'Kx/2):
//   loss(vec K) = -tr(K) + 1/2 tr(KKW); every block equals W, g = vec(I).
QuadraticLoss build_gaussian_loss(const Eigen::MatrixXd& w);

// Same structure with the population covariance in place of W.
QuadraticLoss population_gaussian_loss(const Eigen::MatrixXd& sigma);

// Truncated centered Gaussian on the non-negative orthant; block j is
// (1/n) sum_i x_ij^2 x_i x_i' and g = 2 vec(W) + vec(diag W).
QuadraticLoss build_nonneg_gaussian_loss(const DataMatrix& x);

// Truncated Gaussian with free location, q ~ exp(-x'Kx/2 + eta'x) on the
// non-negative orthant; adds one unpenalized singleton per variable.
QuadraticLoss build_truncated_location_loss(const DataMatrix& x);

// Normal-conditionals family,
//   log q = sum_{j<k} B2_jk x_j^2 x_k^2 + sum_{j,k} B_jk x_j x_k + sum_j b_j x_j,
// with B symmetric and B2 symmetric with zero diagonal.  m blocks of size
// (2m+1) x (2m+1) holding the j-th columns of B and B2 plus b_j.
QuadraticLoss build_normal_conditionals_loss(const DataMatrix& x);

// User-supplied pairwise family.  For each data point x and coordinate j the
// callbacks return, in the block layout of `layout(m, A, L)`:
//   h(x, j)  = d/dx_j of the block-j sufficient statistics,
//   hh(x, j) = d^2/dx_j^2 of the same statistics,
// plus (optionally) partial derivatives of the log base measure b(x).
struct PairwiseStatSpec {
  int num_sets = 1;                       // A
  std::vector<bool> diag_fixed_zero{false};
  int num_singleton_sets = 0;             // L
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)> h;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)> hh;
  std::function<double(const Eigen::VectorXd&, int)> db;   // d b / d x_j, may be null
  std::function<double(const Eigen::VectorXd&, int)> d2b;  // d^2 b / d x_j^2, may be null
};

QuadraticLoss build_general_pairwise_loss(const PairwiseStatSpec& spec, const DataMatrix& x,
                                          Domain domain);

// Dispatch by family.
QuadraticLoss build_loss(const FamilySpec& family, const DataMatrix& x);

}  // namespace scorematch
