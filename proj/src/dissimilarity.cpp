#include "fieldclust/dissimilarity.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "fieldclust/error.hpp"

namespace fieldclust {

std::vector<SegmentValue> unique_values(std::span<const Segment> segments) {
  if (segments.empty()) throw Error(ErrorKind::empty_analysis, "no analyzable segments");
  std::vector<SegmentValue> values;
  std::map<Bytes, std::size_t> index;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    auto [it, inserted] = index.emplace(segments[i].bytes, values.size());
    if (inserted) values.push_back({segments[i].bytes, {}});
    values[it->second].members.push_back(i);
  }
  return values;
}

double canberra_equal(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) {
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("canberra_equal needs two non-empty vectors of equal length");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    int a = x[i];
    int b = y[i];
    if (a + b > 0) sum += double(std::abs(a - b)) / double(a + b);
  }
  return sum / double(x.size());
}

double canberra_dissimilarity(std::span<const std::uint8_t> u, std::span<const std::uint8_t> v) {
  if (u.size() < 2 || v.size() < 2)
    throw std::invalid_argument("canberra_dissimilarity needs vectors of at least two bytes");
  if (u.size() > v.size()) std::swap(u, v);
  if (u.size() == v.size()) return canberra_equal(u, v);

  const std::size_t m = u.size();
  const std::size_t big_m = v.size();
  double best = 1.0;
  for (std::size_t o = 0; o + m <= big_m; ++o) {
    best = std::min(best, canberra_equal(u, v.subspan(o, m)));
    if (best == 0.0) break;
  }
  double r = double(m) / double(big_m);
  double d = (double(m) * best + double(big_m - m) * (1.0 - r * (1.0 - best))) / double(big_m);
  return std::clamp(d, 0.0, 1.0);
}

std::vector<double> DissimilarityMatrix::row_without_self(std::size_t i) const {
  std::vector<double> row;
  row.reserve(n_ > 0 ? n_ - 1 : 0);
  for (std::size_t j = 0; j < n_; ++j)
    if (j != i) row.push_back((*this)(i, j));
  return row;
}

double DissimilarityMatrix::max_entry() const noexcept {
  return upper_.empty() ? 0.0 : *std::max_element(upper_.begin(), upper_.end());
}

DissimilarityMatrix build_matrix(std::span<const SegmentValue> values, unsigned threads) {
  const std::size_t n = values.size();
  if (n < 2) throw Error(ErrorKind::empty_analysis, "need at least two unique segment values");
  DissimilarityMatrix matrix(n);

  auto fill_rows = [&](std::size_t worker, std::size_t workers) {
    // Interleaved rows balance the triangular workload.
    for (std::size_t i = worker; i < n; i += workers)
      for (std::size_t j = i + 1; j < n; ++j)
        matrix.set(i, j, canberra_dissimilarity(values[i].bytes, values[j].bytes));
  };

  std::size_t workers = std::clamp<std::size_t>(threads, 1, n);
  if (workers == 1) {
    fill_rows(0, 1);
    return matrix;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(fill_rows, w, workers);
  pool.clear();
  return matrix;
}

void write_matrix_csv(std::ostream& out, const DissimilarityMatrix& matrix) {
  const std::size_t n = matrix.size();
  for (std::size_t j = 0; j < n; ++j) out << (j ? "," : "") << j;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::snprintf(buf, sizeof buf, "%.6g", matrix(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace fieldclust
