#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gsrsep {

/// Dense column-major real matrix used for spectrograms, dictionaries,
/// activations and Lagrange multipliers.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but carries no usable signal (e.g. all zeros).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf contamination, SVD or factorization failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Text or binary input could not be parsed. `position()` is a byte offset
/// for binary formats and a 1-based line number for text formats.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

/// Magic bytes or header fields do not describe a known format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Header is valid but the payload disagrees with it.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

/// File system failure (cannot open, cannot write).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Partition of dictionary columns (and activation rows) into contiguous
/// blocks, one per sub-dictionary.
struct GroupPartition {
  std::vector<std::size_t> block_sizes;

  std::size_t count() const noexcept { return block_sizes.size(); }
  std::size_t total() const noexcept;
  /// First column of block `g`.
  std::size_t offset(std::size_t g) const;

  bool operator==(const GroupPartition&) const = default;
};

/// Throws InvalidArgument unless `m` is non-empty and every entry is finite.
void require_real_matrix(const Matrix& m, std::string_view name);

/// Throws InvalidArgument unless `a` and `b` have identical shape.
void require_same_shape(const Matrix& a, const Matrix& b, std::string_view what);

}  // namespace gsrsep
