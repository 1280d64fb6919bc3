#pragma once

#include <Eigen/Core>
#include <vector>

#include "scorematch/layout.hpp"

namespace scorematch {

// Empirical (non-negative) score matching loss in block form,
//   loss(theta) = 1/2 theta' Gamma theta - g' theta + c,
// where Gamma is block-diagonal with one PSD block per variable and theta is
// the stacked per-block parameter vector described by the layout.
class QuadraticLoss {
 public:
  QuadraticLoss() = default;
  // blocks.size() must be m, or 1 when every block is identical.
  QuadraticLoss(LayoutPtr layout, std::vector<Eigen::MatrixXd> blocks, Eigen::VectorXd g, double c);

  const LayoutPtr& layout() const { return layout_; }
  int m() const { return layout_->m(); }
  int block_size() const { return layout_->block_size(); }
  bool shared_blocks() const { return blocks_.size() == 1; }
  const Eigen::MatrixXd& block(int j) const { return blocks_[shared_blocks() ? 0 : j]; }
  const std::vector<Eigen::MatrixXd>& blocks() const { return blocks_; }
  const Eigen::VectorXd& g() const { return g_; }
  double constant() const { return c_; }

  // Loss at a stacked vector (need not respect symmetry).
  double value_stacked(const Eigen::VectorXd& theta) const;
  double value_reduced(const Eigen::VectorXd& u) const;
  double value(const ParameterVector& theta) const { return value_reduced(theta.reduced()); }

  // Gradient of the smooth part in reduced coordinates: contract(Gamma theta - g).
  Eigen::VectorXd grad_reduced(const Eigen::VectorXd& u) const;
  // Reduced Hessian applied to a reduced vector: contract(Gamma expand(u)).
  Eigen::VectorXd applyQ_reduced(const Eigen::VectorXd& u) const;

  // Reduced Hessian entries Q_ij = sum over co-located block entries.
  double quad_entry(int i, int j) const;
  double curvature(int i) const { return quad_entry(i, i); }
  // Linear term in reduced coordinates, b = contract(g).
  Eigen::VectorXd b_reduced() const { return layout_->contract_sum(g_); }

  double max_block_diagonal() const;
  // Minimum eigenvalue over all blocks (distinct blocks only).
  double min_block_eigenvalue() const;

 private:
  LayoutPtr layout_;
  std::vector<Eigen::MatrixXd> blocks_;
  Eigen::VectorXd g_;
  double c_ = 0.0;
};

}  // namespace scorematch
