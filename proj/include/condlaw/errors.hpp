#pragma once

#include <stdexcept>
#include <string>

namespace condlaw {

/// Parameter outside the admissible range of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computation would exceed its configured cell or enumeration budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The conditioning event {S_n = k_n} has probability zero.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature or root finding failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few samples or events to support the requested statistic.
class StatisticalPowerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Zero variance in X or Y.
class DegenerateModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace condlaw
