#pragma once

#include <stdexcept>
#include <string>

namespace betamix {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Violated caller contract (bad sizes, unsorted grids, negative weights ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Adaptive routine failed to reach the requested tolerance.
// Carries the best estimate it had when it gave up.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double best, double err)
      : std::runtime_error(what), best_estimate(best), error_estimate(err) {}
  double best_estimate;
  double error_estimate;
};

// Moment sequence too close to singular for the requested node count.
class DegeneracyError : public std::runtime_error {
 public:
  DegeneracyError(const std::string& what, int usable_nodes)
      : std::runtime_error(what), usable_nodes(usable_nodes) {}
  int usable_nodes;
};

// Resource (atoms, cells, stick truncation, wall clock) exceeded.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown catalog id.
class CatalogError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input text (mixtures, chains, configs, reports).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// First-order correction went nonpositive: alpha too small for this density.
class CorrectionError : public DomainError {
 public:
  CorrectionError(const std::string& what, double x) : DomainError(what), x(x) {}
  double x;
};

// File could not be read or written; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace betamix
