#pragma once

#include <Eigen/Core>

namespace scorematch {

// Observations, one sample per row.
struct DataMatrix {
  Eigen::MatrixXd values;

  DataMatrix() = default;
  explicit DataMatrix(Eigen::MatrixXd v) : values(std::move(v)) {}

  int n() const { return static_cast<int>(values.rows()); }
  int m() const { return static_cast<int>(values.cols()); }

  // Throws DataError if any entry is non-finite, if the shape is unusable
  // for loss construction (n < 1 or m < 2), or, when require_nonneg is set,
  // if any entry is negative.
  void validate(bool require_nonneg = false) const;
};

}  // namespace scorematch
