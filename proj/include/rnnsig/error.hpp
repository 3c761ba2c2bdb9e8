#pragma once

#include <stdexcept>
#include <string>

namespace rnnsig {

// Bad arguments: shape mismatches, out-of-range indices, invalid configs.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// The computation itself broke down: step-size underflow, non-finite loss.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace rnnsig
