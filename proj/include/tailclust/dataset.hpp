#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailclust/matrix.hpp"

namespace tailclust {

// Assignment of observed columns to variable groups. Group ids are the
// positions in `groups`; column ids are 0-based positions in the data matrix.
struct GroupLayout {
  std::vector<std::vector<int>> groups;

  int group_count() const { return static_cast<int>(groups.size()); }
  int column_count() const {
    int total = 0;
    for (const auto& g : groups) total += static_cast<int>(g.size());
    return total;
  }

  // Every column in [0, q) must be covered exactly once and no group may be
  // empty. Throws std::invalid_argument with the offending index otherwise.
  void validate(int q) const {
    if (groups.empty()) throw std::invalid_argument("layout has no groups");
    std::vector<int> seen(static_cast<std::size_t>(q), 0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].empty())
        throw std::invalid_argument("layout group " + std::to_string(g) +
                                    " is empty");
      for (int c : groups[g]) {
        if (c < 0)
          throw std::invalid_argument("column index " + std::to_string(c) +
                                      " is negative");
        if (c >= q)
          throw std::invalid_argument(
              "column index " + std::to_string(c) +
              " is out of range for " + std::to_string(q) + " columns");
        if (seen[static_cast<std::size_t>(c)]++)
          throw std::invalid_argument("column index " + std::to_string(c) +
                                      " appears in more than one group");
      }
    }
    for (int c = 0; c < q; ++c)
      if (!seen[static_cast<std::size_t>(c)])
        throw std::invalid_argument("column index " + std::to_string(c) +
                                    " is not covered by any group");
  }
};

// Observations plus the grouping of their columns.
struct Dataset {
  Matrix<double> values;  // n rows, q columns
  GroupLayout layout;

  int n() const { return static_cast<int>(values.rows()); }
  int q() const { return static_cast<int>(values.cols()); }
  int d() const { return layout.group_count(); }
};

inline void validate_dataset(const Dataset& ds) {
  if (ds.values.rows() < 2)
    throw std::invalid_argument("dataset needs at least 2 rows, got " +
                                std::to_string(ds.values.rows()));
  ds.layout.validate(ds.q());
  for (std::size_t i = 0; i < ds.values.rows(); ++i)
    for (std::size_t j = 0; j < ds.values.cols(); ++j)
      if (!std::isfinite(ds.values(i, j)))
        throw std::invalid_argument(
            "non-finite value at row " + std::to_string(i + 1) + ", column " +
            std::to_string(j + 1));
}

// Within-column ranks, 1..n, ties broken by ascending row index. Only the
// ordering of each column matters downstream, which is what makes every
// estimator in this library invariant under strictly increasing
// transformations of the margins.
using RankMatrix = Matrix<int>;

inline RankMatrix rank_matrix(const Matrix<double>& values) {
  const std::size_t n = values.rows(), q = values.cols();
  RankMatrix ranks(n, q);
  std::vector<std::size_t> order(n);
  for (std::size_t c = 0; c < q; ++c) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return values(a, c) < values(b, c);
                     });
    for (std::size_t pos = 0; pos < n; ++pos)
      ranks(order[pos], c) = static_cast<int>(pos) + 1;
  }
  return ranks;
}

// Column-wise maxima over consecutive blocks of m rows. A trailing partial
// block is dropped, so the result has floor(n/m) rows.
inline Matrix<double> block_maxima(const Matrix<double>& values, int m) {
  const std::size_t n = values.rows(), q = values.cols();
  if (m < 1)
    throw std::invalid_argument("block length must be >= 1, got " +
                                std::to_string(m));
  if (static_cast<std::size_t>(m) > n)
    throw std::invalid_argument("block length " + std::to_string(m) +
                                " exceeds row count " + std::to_string(n));
  const std::size_t nblocks = n / static_cast<std::size_t>(m);
  Matrix<double> out(nblocks, q);
  for (std::size_t b = 0; b < nblocks; ++b) {
    const std::size_t lo = b * static_cast<std::size_t>(m);
    for (std::size_t c = 0; c < q; ++c) {
      double best = values(lo, c);
      for (std::size_t i = lo + 1; i < lo + static_cast<std::size_t>(m); ++i)
        best = std::max(best, values(i, c));
      out(b, c) = best;
    }
  }
  return out;
}

inline Dataset block_maxima(const Dataset& ds, int m) {
  return Dataset{block_maxima(ds.values, m), ds.layout};
}

}  // namespace tailclust
