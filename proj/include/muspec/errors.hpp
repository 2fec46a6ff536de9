#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace muspec {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is a byte offset into the input.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected,
              const std::string& message);

  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Evaluation left the real domain (log of a non-positive value, 0/0, ...).
class DomainError : public Error {
 public:
  DomainError(std::string subexpression, double input, const std::string& what);

  const std::string& subexpression() const { return subexpression_; }
  double input() const { return input_; }

 private:
  std::string subexpression_;
  double input_;
};

/// Descriptor or configuration failed validation; `path` names the field.
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& what);

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// A numerical precondition failed (singular coefficient, no admissible pairs).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace muspec
