#pragma once

#include <stdexcept>
#include <string>

namespace rxinv {

// Shape or size mismatch between containers that should agree.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad user input: unknown keys, invalid enums, out-of-range parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular factorization and similar linear-algebra failures.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values appeared while time stepping or iterating.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backtracking exhausted without decreasing the objective.
class StagnationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rxinv
