#include "scorematch/penalty.hpp"

#include <cmath>
#include <stdexcept>

namespace scorematch {

PenaltySpec PenaltySpec::l1_offdiagonal(const ParamLayout& layout) {
  PenaltySpec spec;
  spec.mode = Mode::L1;
  for (int id : layout.pair_coords())
    spec.groups.push_back({{id}, static_cast<double>(layout.coord(id).n_locs)});
  return spec;
}

PenaltySpec PenaltySpec::group_pairs(const ParamLayout& layout) {
  PenaltySpec spec;
  spec.mode = Mode::Group;
  const int m = layout.m();
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) {
      Group grp;
      for (int a = 0; a < layout.num_sets(); ++a) grp.coords.push_back(layout.pair_id(a, j, k));
      grp.multiplicity = 2.0;
      spec.groups.push_back(std::move(grp));
    }
  return spec;
}

std::vector<int> PenaltySpec::coord_to_group(const ParamLayout& layout) const {
  std::vector<int> map(layout.num_coords(), -1);
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (int id : groups[gi].coords) {
      if (id < 0 || id >= layout.num_coords())
        throw std::invalid_argument("PenaltySpec: coordinate id out of range");
      if (map[id] != -1) throw std::invalid_argument("PenaltySpec: groups must be disjoint");
      map[id] = static_cast<int>(gi);
    }
  return map;
}

std::vector<int> PenaltySpec::unpenalized_coords(const ParamLayout& layout) const {
  const std::vector<int> map = coord_to_group(layout);
  std::vector<int> out;
  for (int id = 0; id < layout.num_coords(); ++id)
    if (map[id] == -1) out.push_back(id);
  return out;
}

double PenaltySpec::norm(const Eigen::VectorXd& u) const {
  double total = 0;
  for (const auto& grp : groups) {
    double sq = 0;
    for (int id : grp.coords) sq += u[id] * u[id];
    total += grp.multiplicity * std::sqrt(sq);
  }
  return total;
}

void PenaltySpec::validate(const ParamLayout& layout) const {
  coord_to_group(layout);  // range + disjointness
  for (const auto& grp : groups) {
    if (grp.coords.empty()) throw std::invalid_argument("PenaltySpec: empty group");
    if (mode == Mode::L1 && grp.coords.size() != 1)
      throw std::invalid_argument("PenaltySpec: l1 mode requires singleton groups");
    if (!(grp.multiplicity > 0)) throw std::invalid_argument("PenaltySpec: multiplicity must be positive");
  }
}

}  // namespace scorematch
