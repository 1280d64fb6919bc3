#pragma once

#include <vector>

#include "scorematch/layout.hpp"

namespace scorematch {

// Which coordinates the l1 (or group) penalty acts on.  Multiplicities count
// how often a reduced coordinate appears in the full vectorized penalty; a
// symmetric pair (j,k) is counted for both (j,k) and (k,j), so its weight at
// level lambda is 2*lambda.
struct PenaltySpec {
  enum class Mode { L1, Group };

  struct Group {
    std::vector<int> coords;  // reduced coordinate ids, disjoint across groups
    double multiplicity = 1.0;
  };

  Mode mode = Mode::L1;
  std::vector<Group> groups;  // singleton groups in L1 mode

  // Default penalty: every pair coordinate of every interaction set gets its
  // own l1 term; diagonals and singletons stay unpenalized.
  static PenaltySpec l1_offdiagonal(const ParamLayout& layout);
  // Group penalty tying together the pair coordinates of all interaction
  // sets for each (j,k), e.g. {B_jk, B2_jk} for the normal-conditionals
  // family.
  static PenaltySpec group_pairs(const ParamLayout& layout);

  // Map coordinate id -> group index, or -1 when unpenalized.
  std::vector<int> coord_to_group(const ParamLayout& layout) const;
  // Coordinates not covered by any group.
  std::vector<int> unpenalized_coords(const ParamLayout& layout) const;
  // Penalty value at reduced coordinates u (without the lambda factor).
  double norm(const Eigen::VectorXd& u) const;

  void validate(const ParamLayout& layout) const;
};

}  // namespace scorematch
