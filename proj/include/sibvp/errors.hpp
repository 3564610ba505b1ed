#pragma once

#include <stdexcept>
#include <string>

namespace sibvp {

/// Base class for every failure reported by the library.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step argument outside the admissible range (|s| must not exceed 1).
class InvalidStepError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Series truncation bound still above tolerance at the term cap.
class NonConvergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Evaluation left the representable range (overflow of exp/sinh).
class RangeError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Both bracket ends of a shooting bisection classify the same way.
class BadBracketError : public SolverError {
 public:
  using SolverError::SolverError;
};

class SingularJacobianError : public SolverError {
 public:
  using SolverError::SolverError;
};

class DivergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A bound formula was requested outside its hypotheses.
class PreconditionError : public SolverError {
 public:
  using SolverError::SolverError;
};

class NoRootError : public SolverError {
 public:
  using SolverError::SolverError;
};

class DivergentIntegralError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace sibvp
