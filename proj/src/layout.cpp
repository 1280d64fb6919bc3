#include "scorematch/layout.hpp"

#include <stdexcept>

#include "scorematch/errors.hpp"

namespace scorematch {

ParamLayout::ParamLayout(int m, int num_sets, std::vector<bool> diag_fixed_zero, int num_singleton_sets)
    : m_(m),
      num_sets_(num_sets),
      num_singleton_sets_(num_singleton_sets),
      diag_fixed_zero_(std::move(diag_fixed_zero)) {
  if (m < 1) throw std::invalid_argument("ParamLayout: m must be >= 1");
  if (num_sets < 1) throw std::invalid_argument("ParamLayout: need at least one interaction set");
  if (static_cast<int>(diag_fixed_zero_.size()) != num_sets)
    throw std::invalid_argument("ParamLayout: diag flags size mismatch");

  diag_base_.assign(num_sets_, -1);
  pair_base_.assign(num_sets_, -1);
  singleton_base_.assign(std::max(num_singleton_sets_, 1), -1);

  // Reduced ids: diagonals set by set, then singletons, then pairs.  The
  // smooth (unpenalized by default) coordinates come first.
  for (int a = 0; a < num_sets_; ++a) {
    if (diag_fixed_zero_[a]) continue;
    diag_base_[a] = static_cast<int>(coords_.size());
    for (int j = 0; j < m_; ++j) {
      CoordInfo ci{CoordKind::Diagonal, a, j, j, {}, 1};
      ci.locs[0] = {j, within_index(a, j)};
      coords_.push_back(ci);
    }
  }
  for (int l = 0; l < num_singleton_sets_; ++l) {
    singleton_base_[l] = static_cast<int>(coords_.size());
    for (int j = 0; j < m_; ++j) {
      CoordInfo ci{CoordKind::Singleton, l, j, -1, {}, 1};
      ci.locs[0] = {j, singleton_within(l)};
      coords_.push_back(ci);
    }
  }
  for (int a = 0; a < num_sets_; ++a) {
    pair_base_[a] = static_cast<int>(coords_.size());
    for (int j = 0; j < m_; ++j) {
      for (int k = j + 1; k < m_; ++k) {
        CoordInfo ci{CoordKind::Pair, a, j, k, {}, 2};
        ci.locs[0] = {j, within_index(a, k)};
        ci.locs[1] = {k, within_index(a, j)};
        coords_.push_back(ci);
      }
    }
  }
  for (int id = 0; id < num_coords(); ++id) {
    if (coords_[id].kind == CoordKind::Pair)
      pair_ids_.push_back(id);
    else
      smooth_ids_.push_back(id);
  }
  set_names_.resize(num_sets_);
  singleton_names_.resize(num_singleton_sets_);
  for (int a = 0; a < num_sets_; ++a) set_names_[a] = num_sets_ == 1 ? "K" : "M" + std::to_string(a + 1);
  for (int l = 0; l < num_singleton_sets_; ++l)
    singleton_names_[l] = num_singleton_sets_ == 1 ? "b" : "b" + std::to_string(l + 1);
}

std::shared_ptr<const ParamLayout> ParamLayout::general(int m, int num_sets,
                                                        std::vector<bool> diag_fixed_zero,
                                                        int num_singleton_sets) {
  return std::shared_ptr<const ParamLayout>(
      new ParamLayout(m, num_sets, std::move(diag_fixed_zero), num_singleton_sets));
}

std::shared_ptr<const ParamLayout> ParamLayout::pairwise(int m) { return general(m, 1, {false}, 0); }

std::shared_ptr<const ParamLayout> ParamLayout::pairwise_with_location(int m) {
  auto layout = std::shared_ptr<ParamLayout>(new ParamLayout(m, 1, {false}, 1));
  layout->set_set_names({"K"}, {"eta"});
  return layout;
}

std::shared_ptr<const ParamLayout> ParamLayout::normal_conditionals(int m) {
  auto layout = std::shared_ptr<ParamLayout>(new ParamLayout(m, 2, {false, true}, 1));
  layout->set_set_names({"B", "B2"}, {"b"});
  return layout;
}

void ParamLayout::set_set_names(std::vector<std::string> names, std::vector<std::string> singleton_names) {
  if (static_cast<int>(names.size()) == num_sets_) set_names_ = std::move(names);
  if (static_cast<int>(singleton_names.size()) == num_singleton_sets_)
    singleton_names_ = std::move(singleton_names);
}

int ParamLayout::diag_id(int set, int j) const {
  if (set < 0 || set >= num_sets_ || diag_base_[set] < 0)
    throw std::invalid_argument("ParamLayout: no diagonal coordinate for this set");
  return diag_base_[set] + j;
}

int ParamLayout::pair_id(int set, int j, int k) const {
  if (j == k) throw std::invalid_argument("ParamLayout: pair coordinates need j != k");
  if (j > k) std::swap(j, k);
  // pairs for fixed j start at offset j*m - j*(j+1)/2
  const int off = j * m_ - j * (j + 1) / 2 + (k - j - 1);
  return pair_base_[set] + off;
}

int ParamLayout::singleton_id(int lset, int j) const { return singleton_base_[lset] + j; }

Eigen::VectorXd ParamLayout::expand(const Eigen::VectorXd& reduced) const {
  if (reduced.size() != num_coords()) throw std::invalid_argument("expand: dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(stacked_dim());
  const int p = block_size();
  for (int id = 0; id < num_coords(); ++id) {
    const CoordInfo& ci = coords_[id];
    for (int l = 0; l < ci.n_locs; ++l) out[ci.locs[l].first * p + ci.locs[l].second] = reduced[id];
  }
  return out;
}

Eigen::VectorXd ParamLayout::contract_sum(const Eigen::VectorXd& stacked) const {
  if (stacked.size() != stacked_dim()) throw std::invalid_argument("contract_sum: dimension mismatch");
  Eigen::VectorXd out(num_coords());
  const int p = block_size();
  for (int id = 0; id < num_coords(); ++id) {
    const CoordInfo& ci = coords_[id];
    double s = 0;
    for (int l = 0; l < ci.n_locs; ++l) s += stacked[ci.locs[l].first * p + ci.locs[l].second];
    out[id] = s;
  }
  return out;
}

std::string ParamLayout::coord_name(int id) const {
  const CoordInfo& ci = coords_[id];
  switch (ci.kind) {
    case CoordKind::Singleton:
      return singleton_names_[ci.set] + "[" + std::to_string(ci.j + 1) + "]";
    default:
      return set_names_[ci.set] + "[" + std::to_string(ci.j + 1) + "," + std::to_string(ci.k + 1) + "]";
  }
}

bool ParamLayout::same_shape(const ParamLayout& other) const {
  return m_ == other.m_ && num_sets_ == other.num_sets_ &&
         num_singleton_sets_ == other.num_singleton_sets_ && diag_fixed_zero_ == other.diag_fixed_zero_;
}

ParameterVector::ParameterVector(LayoutPtr layout, Eigen::VectorXd reduced)
    : layout_(std::move(layout)), reduced_(std::move(reduced)) {
  if (reduced_.size() != layout_->num_coords())
    throw std::invalid_argument("ParameterVector: reduced dimension mismatch");
}

Eigen::MatrixXd ParameterVector::matrix(int set) const {
  const int m = layout_->m();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  if (!layout_->diag_fixed_zero(set))
    for (int j = 0; j < m; ++j) out(j, j) = reduced_[layout_->diag_id(set, j)];
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) out(j, k) = out(k, j) = reduced_[layout_->pair_id(set, j, k)];
  return out;
}

Eigen::VectorXd ParameterVector::singletons(int lset) const {
  const int m = layout_->m();
  Eigen::VectorXd out(m);
  for (int j = 0; j < m; ++j) out[j] = reduced_[layout_->singleton_id(lset, j)];
  return out;
}

ParameterVector ParameterVector::from_matrix(const LayoutPtr& layout, const Eigen::MatrixXd& theta,
                                             int set) {
  const int m = layout->m();
  if (theta.rows() != m || theta.cols() != m)
    throw std::invalid_argument("from_matrix: dimension mismatch");
  if ((theta - theta.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, theta.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("from_matrix: matrix must be symmetric");
  ParameterVector out(layout);
  if (!layout->diag_fixed_zero(set))
    for (int j = 0; j < m; ++j) out.reduced()[layout->diag_id(set, j)] = theta(j, j);
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) out.reduced()[layout->pair_id(set, j, k)] = theta(j, k);
  return out;
}

}  // namespace scorematch
