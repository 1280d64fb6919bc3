#pragma once

#include <Eigen/Core>
#include <array>
#include <memory>
#include <string>
#include <vector>

namespace scorematch {

// One reduced (free) parameter coordinate.  Pair coordinates represent both
// symmetric entries (j,k) and (k,j) of an interaction matrix and therefore
// appear in two diagonal blocks of the loss; diagonal and singleton
// coordinates appear in one.
enum class CoordKind { Diagonal, Pair, Singleton };

struct CoordInfo {
  CoordKind kind;
  int set;  // interaction-set index (matrices) or singleton-set index
  int j;    // 0-based
  int k;    // pair partner (j < k); equals j for diagonals, -1 for singletons
  std::array<std::pair<int, int>, 2> locs;  // (block, within-block) locations
  int n_locs;
};

// Describes the parameter space of a pairwise interaction model: A symmetric
// m x m interaction matrices (some with structurally zero diagonal) plus L
// per-variable singleton parameters.  Provides the mapping between
//   - reduced coordinates (one per free parameter),
//   - the stacked representation (m blocks of size A*m + L, block j holding
//     the j-th columns of every interaction matrix and the j-th singletons),
// which is the vec-style layout the block-diagonal quadratic losses act on.
class ParamLayout {
 public:
  static std::shared_ptr<const ParamLayout> pairwise(int m);
  static std::shared_ptr<const ParamLayout> pairwise_with_location(int m);
  static std::shared_ptr<const ParamLayout> normal_conditionals(int m);
  static std::shared_ptr<const ParamLayout> general(int m, int num_sets,
                                                    std::vector<bool> diag_fixed_zero,
                                                    int num_singleton_sets);

  int m() const { return m_; }
  int num_sets() const { return num_sets_; }
  int num_singleton_sets() const { return num_singleton_sets_; }
  bool diag_fixed_zero(int set) const { return diag_fixed_zero_[set]; }

  int block_size() const { return num_sets_ * m_ + num_singleton_sets_; }
  int stacked_dim() const { return m_ * block_size(); }
  int num_coords() const { return static_cast<int>(coords_.size()); }

  const CoordInfo& coord(int id) const { return coords_[id]; }
  const std::vector<int>& pair_coords() const { return pair_ids_; }
  const std::vector<int>& smooth_coords() const { return smooth_ids_; }

  int diag_id(int set, int j) const;
  int pair_id(int set, int j, int k) const;  // unordered, j != k
  int singleton_id(int lset, int j) const;

  int within_index(int set, int row) const { return set * m_ + row; }
  int singleton_within(int lset) const { return num_sets_ * m_ + lset; }

  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
  // Adjoint of expand: sums a stacked vector over each coordinate's locations.
  Eigen::VectorXd contract_sum(const Eigen::VectorXd& stacked) const;

  // Human-readable coordinate name, e.g. "K[1,2]" (1-based), for exports.
  std::string coord_name(int id) const;
  void set_set_names(std::vector<std::string> names, std::vector<std::string> singleton_names);
  const std::string& set_name(int set) const { return set_names_[set]; }
  const std::string& singleton_name(int l) const { return singleton_names_[l]; }

  bool same_shape(const ParamLayout& other) const;

 private:
  ParamLayout(int m, int num_sets, std::vector<bool> diag_fixed_zero, int num_singleton_sets);

  int m_;
  int num_sets_;
  int num_singleton_sets_;
  std::vector<bool> diag_fixed_zero_;
  std::vector<CoordInfo> coords_;
  std::vector<int> pair_ids_;    // all pair coordinates
  std::vector<int> smooth_ids_;  // diagonal + singleton coordinates
  std::vector<int> diag_base_;   // id of diag(set, 0); -1 when fixed zero
  std::vector<int> pair_base_;   // id of first pair coord per set
  std::vector<int> singleton_base_;
  std::vector<std::string> set_names_;
  std::vector<std::string> singleton_names_;
};

using LayoutPtr = std::shared_ptr<const ParamLayout>;

// A point in parameter space tied to a layout, stored in reduced form with
// symmetry structural.
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(LayoutPtr layout)
      : layout_(std::move(layout)), reduced_(Eigen::VectorXd::Zero(layout_->num_coords())) {}
  ParameterVector(LayoutPtr layout, Eigen::VectorXd reduced);

  const LayoutPtr& layout() const { return layout_; }
  const Eigen::VectorXd& reduced() const { return reduced_; }
  Eigen::VectorXd& reduced() { return reduced_; }

  Eigen::VectorXd stacked() const { return layout_->expand(reduced_); }
  // Symmetric matrix view of interaction set `set`.
  Eigen::MatrixXd matrix(int set = 0) const;
  Eigen::VectorXd singletons(int lset = 0) const;

  static ParameterVector from_matrix(const LayoutPtr& layout, const Eigen::MatrixXd& theta, int set = 0);

 private:
  LayoutPtr layout_;
  Eigen::VectorXd reduced_;
};

}  // namespace scorematch
