#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ujack {

// Bad user input or violated precondition. The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data are valid but carry no information for the requested test (exit code 3).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingColumn : public InputError {
 public:
  explicit MissingColumn(const std::string& name)
      : InputError("missing column '" + name + "'"), column(name) {}
  std::string column;
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t row_, std::size_t col_, const std::string& cell)
      : InputError("cannot parse '" + cell + "' at row " + std::to_string(row_) +
                   ", column " + std::to_string(col_)),
        row(row_),
        col(col_) {}
  std::size_t row;
  std::size_t col;
};

class NonFiniteValue : public InputError {
 public:
  NonFiniteValue(std::size_t row_, std::size_t col_)
      : InputError("non-finite value at row " + std::to_string(row_) + ", column " +
                   std::to_string(col_)),
        row(row_),
        col(col_) {}
  std::size_t row;
  std::size_t col;
};

class EmptyFile : public InputError {
 public:
  explicit EmptyFile(const std::string& path) : InputError("empty file: " + path) {}
};

class InvalidParameter : public InputError {
 public:
  using InputError::InputError;
};

class SampleTooSmall : public InputError {
 public:
  SampleTooSmall(std::size_t n, std::size_t needed)
      : InputError("sample too small: n = " + std::to_string(n) + ", need at least " +
                   std::to_string(needed)) {}
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class NonPositiveScale : public InputError {
 public:
  explicit NonPositiveScale(std::size_t theta)
      : InputError("non-positive scale at theta index " + std::to_string(theta)), index(theta) {}
  std::size_t index;
};

class BudgetExceeded : public InputError {
 public:
  using InputError::InputError;
};

class NotCentered : public InputError {
 public:
  explicit NotCentered(double value)
      : InputError("kernel is not centered: P^r h = " + std::to_string(value)), mean(value) {}
  double mean;
};

class DegenerateNormalizer : public DegenerateError {
 public:
  explicit DegenerateNormalizer(std::size_t theta)
      : DegenerateError("normalizing constant vanishes at theta index " + std::to_string(theta)),
        index(theta) {}
  std::size_t index;
};

class AllThetaDegenerate : public DegenerateError {
 public:
  AllThetaDegenerate()
      : DegenerateError("every grid point has a vanishing normalizing constant") {}
};

}  // namespace ujack
