#pragma once

#include <stdexcept>
#include <string>

namespace delconf {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input text that cannot be parsed (bad JSON, bad ARPA line, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A quantity that is undefined for the given input, e.g. NCE over a set with
// a single label class or WER against an empty reference.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace delconf
