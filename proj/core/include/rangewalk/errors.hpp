#pragma once

#include <stdexcept>
#include <string>

namespace rangewalk {

// Bad arguments: malformed walks, out-of-range parameters, inconsistent fields.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parameter combinations that are well formed but violate a required constraint.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative method did not reach its tolerance.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

}  // namespace rangewalk
