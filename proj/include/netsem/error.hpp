#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netsem {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to a generator, distribution or estimator.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Model construction or validation failure (forward reference, unknown
// node, missing network, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Formula text that does not match the grammar.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Failure while evaluating a formula against data.
class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace netsem
