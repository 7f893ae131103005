#pragma once

#include <stdexcept>
#include <string>

namespace mpcm {

// Error taxonomy shared by all components. Everything derives from
// std::runtime_error so callers can catch coarsely at the CLI boundary.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape disagreement between tensor operands.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Structurally valid input that violates an operation's precondition.
class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& msg) : Error(msg) {}
};

// Malformed file content; message carries the path into the document
// or the offending line number.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// NaN/Inf encountered where finite values are required.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace mpcm
