#pragma once

#include <stdexcept>
#include <string>

namespace hadamard {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// A model or parameter set breaks one of its own constraints; what() names it.
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

// A checker was handed inputs that do not satisfy the hypotheses it tests under.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

class DegenerateProfile : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, double last_good)
      : Error(what + " (last good point " + std::to_string(last_good) + ")"),
        last_good_(last_good) {}
  double last_good() const noexcept { return last_good_; }

 private:
  double last_good_;
};

}  // namespace hadamard
