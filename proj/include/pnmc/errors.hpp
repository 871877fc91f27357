#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pnmc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Well-formed input that names something wrong (duplicate or unknown identifier).
class SemanticError : public Error {
 public:
  SemanticError(const std::string& msg, std::string identifier)
      : Error(msg + ": " + identifier), identifier_(std::move(identifier)) {}
  const std::string& identifier() const noexcept { return identifier_; }

 private:
  std::string identifier_;
};

class FiringError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class UnboundVariableError : public Error {
 public:
  using Error::Error;
};

class CaptureError : public Error {
 public:
  using Error::Error;
};

// A formula outside the fragment an engine or transform accepts.
class FragmentError : public Error {
 public:
  using Error::Error;
};

class ResourceExceeded : public Error {
 public:
  using Error::Error;
};

class IncompleteGraphError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace pnmc
