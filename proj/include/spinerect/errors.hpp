#pragma once

#include <stdexcept>
#include <string>

namespace spinerect {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Volume file parsing.
class FormatError : public Error {
 public:
  using Error::Error;
};
class HeaderError : public Error {
 public:
  using Error::Error;
};
class PayloadMismatchError : public Error {
 public:
  using Error::Error;
};
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Bad caller input: invalid geometry, duplicate labels, malformed JSON.
class InputError : public Error {
 public:
  using Error::Error;
};

class CenterlineUndefinedError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// A labeling state broke the consecutive-label or ordering constraint.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NoVertebraDetectedError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

class InfeasibleSpecError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace spinerect
