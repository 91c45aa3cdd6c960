#pragma once

#include <stdexcept>
#include <string>

namespace sorbfit {

/// Bad inputs, bad configuration, bad files. CLI exit code 2.
class invalid_input : public std::invalid_argument {
 public:
  explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

class insufficient_data : public invalid_input {
 public:
  explicit insufficient_data(const std::string& what) : invalid_input(what) {}
};

/// A measured or simulated observable that cannot be log-transformed
/// (nonpositive equilibrium concentration or sorbed amount).
class nonpositive_observable : public invalid_input {
 public:
  explicit nonpositive_observable(const std::string& what) : invalid_input(what) {}
};

/// Numerical failure at runtime (non-convergence, degenerate design,
/// degenerate system). CLI exit code 3.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

class convergence_error : public numeric_error {
 public:
  explicit convergence_error(const std::string& what) : numeric_error(what) {}
};

/// A design the regression cannot distinguish parameters on, such as all
/// abscissas equal.
class degenerate_design : public numeric_error {
 public:
  explicit degenerate_design(const std::string& what) : numeric_error(what) {}
};

}  // namespace sorbfit
