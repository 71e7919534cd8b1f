#pragma once

#include <stdexcept>
#include <string>

namespace qstab {

// Input outside the documented domain of an operation.
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Potential for which -Delta + V fails the discrete coercivity check.
class AdmissibilityError : public std::runtime_error {
public:
  AdmissibilityError(const std::string& what, double margin)
      : std::runtime_error(what), margin_(margin) {}
  double margin() const { return margin_; }

private:
  double margin_;
};

// Iterative method ran out of iterations or line-search room.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Zero source: the extremal formulas degenerate to 0/0.
class DegenerateInputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qstab
