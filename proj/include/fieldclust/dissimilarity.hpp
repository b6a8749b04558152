#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fieldclust/hex.hpp"
#include "fieldclust/segmentation.hpp"

namespace fieldclust {

/// One distinct segment value with the indices (into the analyzable segment
/// list) of every segment carrying it.
struct SegmentValue {
  Bytes bytes;
  std::vector<std::size_t> members;
};

/// Groups segments by identical bytes, ordered by first occurrence.
/// Throws Error(empty_analysis) for an empty input.
std::vector<SegmentValue> unique_values(std::span<const Segment> segments);

/// Mean per-byte Canberra term over two equally long vectors, in [0, 1].
/// term(a, b) = |a - b| / (a + b), term(0, 0) = 0.
double canberra_equal(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y);

/// Canberra dissimilarity extended to vectors of different lengths: the
/// shorter vector slides over the longer one, the best offset C* wins, and
/// the uncovered remainder is penalized:
///   d = (m C* + (M - m)(1 - r (1 - C*))) / M,  r = m / M.
/// Both vectors need at least two bytes.
double canberra_dissimilarity(std::span<const std::uint8_t> u, std::span<const std::uint8_t> v);

/// Symmetric matrix with zero diagonal; only the strict upper triangle is
/// stored.
class DissimilarityMatrix {
 public:
  DissimilarityMatrix() = default;
  explicit DissimilarityMatrix(std::size_t n) : n_(n), upper_(n < 2 ? 0 : n * (n - 1) / 2, 0.0) {}

  std::size_t size() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    if (i == j) return 0.0;
    return upper_[index(i, j)];
  }

  void set(std::size_t i, std::size_t j, double value) noexcept { upper_[index(i, j)] = value; }

  /// Row i without the diagonal entry.
  std::vector<double> row_without_self(std::size_t i) const;

  double max_entry() const noexcept;

  /// Every off-diagonal value once (i < j).
  std::span<const double> condensed() const noexcept { return upper_; }

 private:
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }

  std::size_t n_ = 0;
  std::vector<double> upper_;
};

/// Fills all pairs with canberra_dissimilarity. `threads` > 1 splits rows
/// across workers; the result does not depend on the thread count.
/// Throws Error(empty_analysis) for fewer than two values.
DissimilarityMatrix build_matrix(std::span<const SegmentValue> values, unsigned threads = 1);

/// CSV: header row of value indices, then one row per value.
void write_matrix_csv(std::ostream& out, const DissimilarityMatrix& matrix);

}  // namespace fieldclust
