#include "scorematch/quadratic_loss.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace scorematch {

QuadraticLoss::QuadraticLoss(LayoutPtr layout, std::vector<Eigen::MatrixXd> blocks, Eigen::VectorXd g,
                             double c)
    : layout_(std::move(layout)), blocks_(std::move(blocks)), g_(std::move(g)), c_(c) {
  const int m = layout_->m();
  const int p = layout_->block_size();
  if (blocks_.size() != 1 && static_cast<int>(blocks_.size()) != m)
    throw std::invalid_argument("QuadraticLoss: need 1 shared block or m blocks");
  for (const auto& blk : blocks_)
    if (blk.rows() != p || blk.cols() != p)
      throw std::invalid_argument("QuadraticLoss: block size mismatch with layout");
  if (g_.size() != layout_->stacked_dim())
    throw std::invalid_argument("QuadraticLoss: g dimension must equal sum of block dimensions");
}

double QuadraticLoss::value_stacked(const Eigen::VectorXd& theta) const {
  if (theta.size() != layout_->stacked_dim())
    throw std::invalid_argument("value_stacked: dimension mismatch");
  const int m = layout_->m();
  const int p = layout_->block_size();
  double quad = 0;
  for (int j = 0; j < m; ++j) {
    const auto tj = theta.segment(j * p, p);
    quad += tj.dot(block(j).selfadjointView<Eigen::Lower>() * tj);
  }
  return 0.5 * quad - g_.dot(theta) + c_;
}

double QuadraticLoss::value_reduced(const Eigen::VectorXd& u) const {
  return value_stacked(layout_->expand(u));
}

Eigen::VectorXd QuadraticLoss::grad_reduced(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd theta = layout_->expand(u);
  const int m = layout_->m();
  const int p = layout_->block_size();
  Eigen::VectorXd stacked_grad(layout_->stacked_dim());
  for (int j = 0; j < m; ++j)
    stacked_grad.segment(j * p, p) =
        block(j).selfadjointView<Eigen::Lower>() * theta.segment(j * p, p) - g_.segment(j * p, p);
  return layout_->contract_sum(stacked_grad);
}

Eigen::VectorXd QuadraticLoss::applyQ_reduced(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd theta = layout_->expand(u);
  const int m = layout_->m();
  const int p = layout_->block_size();
  Eigen::VectorXd stacked(layout_->stacked_dim());
  for (int j = 0; j < m; ++j)
    stacked.segment(j * p, p) = block(j).selfadjointView<Eigen::Lower>() * theta.segment(j * p, p);
  return layout_->contract_sum(stacked);
}

double QuadraticLoss::quad_entry(int i, int j) const {
  const CoordInfo& a = layout_->coord(i);
  const CoordInfo& b = layout_->coord(j);
  double q = 0;
  for (int la = 0; la < a.n_locs; ++la)
    for (int lb = 0; lb < b.n_locs; ++lb)
      if (a.locs[la].first == b.locs[lb].first)
        q += block(a.locs[la].first)(a.locs[la].second, b.locs[lb].second);
  return q;
}

double QuadraticLoss::max_block_diagonal() const {
  double v = 0;
  for (const auto& blk : blocks_) v = std::max(v, blk.diagonal().maxCoeff());
  return v;
}

double QuadraticLoss::min_block_eigenvalue() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& blk : blocks_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk, Eigen::EigenvaluesOnly);
    v = std::min(v, es.eigenvalues().minCoeff());
  }
  return v;
}

}  // namespace scorematch
