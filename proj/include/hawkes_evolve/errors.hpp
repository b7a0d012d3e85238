#pragma once

#include <stdexcept>
#include <string>

namespace hawkes_evolve {

// Argument outside the mathematical domain of an operation (negative time,
// zero total rate, f_c >= 1 for the site CDF, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The requested operation is not defined for this kernel bank, e.g. the
// Markov engine on a non-exponential bank.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Closed form is singular for these parameters (beta_1 == beta_2, zero
// denominator in f_c).
class DegenerateParameters : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Iterative numerics did not reach the requested tolerance.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (death on an empty population).
class PreconditionViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Branching matrix has spectral radius >= 1: no stationary mean rate.
class NoStationaryRate : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input document (bank JSON, grid syntax).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hawkes_evolve
