#pragma once

#include <stdexcept>
#include <string>

namespace proalign {

// Precondition violations (bad hyperparameters, mismatched spaces, ...).
using InvalidArgument = std::invalid_argument;

// A dataset or selection with nothing in it.
class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Imbalanced sampling removed every record of a class.
class EmptyClass : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A quantity left its numerical domain (mass outside (0,1), non-finite loss).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace proalign
