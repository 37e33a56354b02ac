#pragma once

#include <stdexcept>
#include <string>

namespace galu {

// Shape or length disagreement between arguments.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside its documented domain (non-finite entries, bad probabilities, ...).
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A requested allocation would exceed the configured memory budget.
class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A matrix that must be invertible (or a data set that must be diverse) is not.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace galu
