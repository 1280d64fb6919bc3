#pragma once

#include <stdexcept>
#include <string>

namespace scorematch {

// Data fails a domain/validity precondition (non-finite entries, negative
// values passed to a non-negative family, ...).
class DataError : public std::invalid_argument {
 public:
  explicit DataError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A linear system that a contract requires to be solvable is numerically
// singular (restricted Gram blocks, unpenalized sub-block, ...).
class RankError : public std::runtime_error {
 public:
  explicit RankError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace scorematch
