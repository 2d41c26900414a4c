#pragma once

#include <stdexcept>
#include <string>

namespace gridflex {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed case file. `line` is 1-based; 0 when the locus is not a line.
class ParseError : public Error {
 public:
  ParseError(std::string source, int line, std::string field, const std::string& what)
      : Error(source + ":" + std::to_string(line) + (field.empty() ? "" : " [" + field + "]") +
              ": " + what),
        source_(std::move(source)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& source() const { return source_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string source_;
  int line_;
  std::string field_;
};

/// A case or scenario that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridflex
