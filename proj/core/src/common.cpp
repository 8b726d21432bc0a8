#include "gsrsep/common.hpp"

#include <numeric>

namespace gsrsep {

std::size_t GroupPartition::total() const noexcept {
  return std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0});
}

std::size_t GroupPartition::offset(std::size_t g) const {
  if (g >= block_sizes.size()) {
    throw InvalidArgument("group index " + std::to_string(g) + " out of range");
  }
  return std::accumulate(block_sizes.begin(), block_sizes.begin() + static_cast<std::ptrdiff_t>(g),
                         std::size_t{0});
}

void require_real_matrix(const Matrix& m, std::string_view name) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw InvalidArgument(std::string(name) + ": matrix must have at least one row and one column");
  }
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(name) + ": matrix contains NaN or Inf");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
  }
}

}  // namespace gsrsep
