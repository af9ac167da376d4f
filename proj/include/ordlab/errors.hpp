#pragma once

#include <stdexcept>
#include <string>

namespace ordlab {

// Point dimension does not match the field it is evaluated against.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Metric evaluation is not symmetric positive definite at a queried point.
class InvalidMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SingularMatrix : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A field or operator was evaluated where it is not defined (nonpositive
// weight, coordinate singularity, node of a wavefunction...).
class EvaluationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical method did not reach its accuracy contract (grid too coarse,
// box too small, root search failed).
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ordlab
