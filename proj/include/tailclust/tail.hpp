#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailclust/dataset.hpp"
#include "tailclust/parallel.hpp"
#include "tailclust/partition.hpp"

namespace tailclust {

// Estimation knobs shared by the rank-based estimators: k is the number of
// highest ranks that count as tail exceedances, m the block length for the
// block-maxima route.
struct TailParams {
  int k = 0;
  std::optional<int> m;

  void validate(int n) const {
    if (k < 1 || k > n)
      throw std::invalid_argument("k must be in [1, " + std::to_string(n) +
                                  "], got " + std::to_string(k));
    if (m && (*m < 1 || *m > n))
      throw std::invalid_argument("m must be in [1, " + std::to_string(n) +
                                  "], got " + std::to_string(*m));
  }
};

// A row belongs to the tail of a column when its rank lies strictly above
// n + 1/2 - k. Ranks are integers, so this is rank >= n - k + 1.
inline bool rank_exceeds(int rank, int n, int k) { return rank + k > n; }

// Set of row indices, packed 64 per word. The pairwise estimators reduce to
// intersection counts of these sets, which keeps the d x d matrix cheap.
class RowSet {
 public:
  explicit RowSet(int n)
      : n_(n), words_(static_cast<std::size_t>((n + 63) / 64), 0) {}

  void set(int i) {
    words_[static_cast<std::size_t>(i) >> 6] |= std::uint64_t{1} << (i & 63);
  }

  void or_with(const RowSet& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
  }

  int count() const {
    int total = 0;
    for (std::uint64_t w : words_) total += std::popcount(w);
    return total;
  }

  static int count_intersection(const RowSet& a, const RowSet& b) {
    int total = 0;
    for (std::size_t w = 0; w < a.words_.size(); ++w)
      total += std::popcount(a.words_[w] & b.words_[w]);
    return total;
  }

  int size() const { return n_; }

 private:
  int n_;
  std::vector<std::uint64_t> words_;
};

namespace detail {

inline void check_k(int k, int n) {
  if (k < 1 || k > n)
    throw std::invalid_argument("k must be in [1, " + std::to_string(n) +
                                "], got " + std::to_string(k));
}

inline void check_col(int c, int q) {
  if (c < 0 || c >= q)
    throw std::invalid_argument("column index " + std::to_string(c) +
                                " is out of range for " + std::to_string(q) +
                                " columns");
}

}  // namespace detail

// Rows where at least one of the given columns is in its upper tail.
inline RowSet exceedance_rows(const RankMatrix& r, std::span<const int> cols,
                              int k) {
  const int n = static_cast<int>(r.rows());
  const int q = static_cast<int>(r.cols());
  detail::check_k(k, n);
  if (cols.empty()) throw std::invalid_argument("empty column set");
  RowSet rows(n);
  for (int c : cols) {
    detail::check_col(c, q);
    for (int i = 0; i < n; ++i)
      if (rank_exceeds(r(static_cast<std::size_t>(i),
                         static_cast<std::size_t>(c)),
                       n, k))
        rows.set(i);
  }
  return rows;
}

// Rank-based estimate of the extremal coefficient of a set of columns: the
// number of rows with at least one tail exceedance, divided by k. Lies in
// [1, n/k] by construction.
inline double ext_coeff_eks(const RankMatrix& r, std::span<const int> cols,
                            int k) {
  return static_cast<double>(exceedance_rows(r, cols, k).count()) / k;
}

// Empirical extremal correlation of two columns: fraction of the k tail rows
// of column a that are also tail rows of column b.
inline double ext_corr(const RankMatrix& r, int a, int b, int k) {
  const int n = static_cast<int>(r.rows());
  const int q = static_cast<int>(r.cols());
  detail::check_k(k, n);
  detail::check_col(a, q);
  detail::check_col(b, q);
  if (a == b) throw std::invalid_argument("column indices must differ");
  int joint = 0;
  for (int i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    if (rank_exceeds(r(row, static_cast<std::size_t>(a)), n, k) &&
        rank_exceeds(r(row, static_cast<std::size_t>(b)), n, k))
      ++joint;
  }
  return static_cast<double>(joint) / k;
}

// Excess extremal coefficient of two groups,
// theta(Ga) + theta(Gb) - theta(Ga u Gb). In terms of exceedance row sets
// this is |A n B| / k, so it is computed with one intersection count and a
// single division.
inline double seco_pair(const RankMatrix& r, const GroupLayout& layout, int a,
                        int b, int k) {
  const int d = layout.group_count();
  if (a < 0 || a >= d || b < 0 || b >= d)
    throw std::invalid_argument("group id out of range for d=" +
                                std::to_string(d));
  if (a == b) throw std::invalid_argument("group ids must differ");
  RowSet ra = exceedance_rows(r, layout.groups[static_cast<std::size_t>(a)], k);
  RowSet rb = exceedance_rows(r, layout.groups[static_cast<std::size_t>(b)], k);
  return static_cast<double>(RowSet::count_intersection(ra, rb)) / k;
}

// Pairwise excess matrix normalized by the smaller of the two per-group
// extremal coefficients, plus the per-group coefficients themselves.
struct SecoMatrix {
  int dim = 0;
  Matrix<double> entries;       // dim x dim, symmetric, unit diagonal
  std::vector<double> thetas;   // per-group extremal coefficient estimates
  int k = 0;

  double operator()(int a, int b) const {
    return entries(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  }
};

// Builds the normalized pairwise excess matrix. Each entry is
// seco_pair(a, b) / min(theta(a), theta(b)), which reduces to the integer
// ratio |Ra n Rb| / min(|Ra|, |Rb|). Entries are computed once per unordered
// pair and mirrored, so the output is bitwise symmetric and independent of
// the thread count.
inline SecoMatrix seco_matrix(const RankMatrix& r, const GroupLayout& layout,
                              int k, int threads = 1) {
  const int n = static_cast<int>(r.rows());
  detail::check_k(k, n);
  layout.validate(static_cast<int>(r.cols()));
  const int d = layout.group_count();

  std::vector<RowSet> sets;
  sets.reserve(static_cast<std::size_t>(d));
  for (int g = 0; g < d; ++g) sets.push_back(RowSet(n));
  parallel_for(static_cast<std::size_t>(d), threads, [&](std::size_t g) {
    sets[g] = exceedance_rows(r, layout.groups[g], k);
  });

  SecoMatrix out;
  out.dim = d;
  out.k = k;
  out.entries = Matrix<double>(static_cast<std::size_t>(d),
                               static_cast<std::size_t>(d), 0.0);
  out.thetas.resize(static_cast<std::size_t>(d));
  std::vector<int> counts(static_cast<std::size_t>(d));
  for (int g = 0; g < d; ++g) {
    counts[static_cast<std::size_t>(g)] = sets[static_cast<std::size_t>(g)].count();
    // Every column contributes exactly k tail rows, so a group union can
    // never fall below k and the normalizer below is never zero.
    assert(counts[static_cast<std::size_t>(g)] >= k);
    out.thetas[static_cast<std::size_t>(g)] =
        static_cast<double>(counts[static_cast<std::size_t>(g)]) / k;
    out.entries(static_cast<std::size_t>(g), static_cast<std::size_t>(g)) = 1.0;
  }

  const std::size_t npairs =
      static_cast<std::size_t>(d) * static_cast<std::size_t>(d - 1) / 2;
  parallel_for(npairs, threads, [&](std::size_t p) {
    // Unrank the pair index into 0 <= a < b < d.
    std::size_t a = 0, offset = 0;
    while (offset + static_cast<std::size_t>(d - 1) - a <= p) {
      offset += static_cast<std::size_t>(d - 1) - a;
      ++a;
    }
    std::size_t b = a + 1 + (p - offset);
    int inter = RowSet::count_intersection(sets[a], sets[b]);
    int denom = std::min(counts[a], counts[b]);
    double v = static_cast<double>(inter) / denom;
    out.entries(a, b) = v;
    out.entries(b, a) = v;
  });
  return out;
}

// Total excess of a partition: sum of per-cluster extremal coefficients minus
// the coefficient of everything pooled. Zero when the partition has a single
// cluster; never negative.
inline double seco_partition(const RankMatrix& r, const GroupLayout& layout,
                             const Partition& p, int k) {
  const int n = static_cast<int>(r.rows());
  detail::check_k(k, n);
  layout.validate(static_cast<int>(r.cols()));
  if (p.d != layout.group_count())
    throw std::invalid_argument("partition is over " + std::to_string(p.d) +
                                " groups but layout has " +
                                std::to_string(layout.group_count()));
  validate_partition(p);

  long long cluster_total = 0;
  RowSet all(n);
  for (const auto& cluster : p.clusters) {
    RowSet rows(n);
    for (int g : cluster) {
      RowSet part =
          exceedance_rows(r, layout.groups[static_cast<std::size_t>(g)], k);
      rows.or_with(part);
    }
    cluster_total += rows.count();
    all.or_with(rows);
  }
  return static_cast<double>(cluster_total - all.count()) / k;
}

// Empirical madogram of the given columns of a rank matrix, typically ranks
// of block maxima. With k rows and d columns the estimate is the rational
//   (d * sum_i max_j R_ij - sum_ij R_ij) / (d * k * (k + 1)),
// evaluated in integers with one final division so the result is the
// correctly rounded value.
inline double madogram(const RankMatrix& r, std::span<const int> cols) {
  const int k = static_cast<int>(r.rows());
  const int q = static_cast<int>(r.cols());
  if (k < 2) throw std::invalid_argument("need at least 2 block rows");
  if (cols.empty()) throw std::invalid_argument("empty column set");
  for (int c : cols) detail::check_col(c, q);
  const long long d = static_cast<long long>(cols.size());
  long long sum_max = 0, sum_all = 0;
  for (int i = 0; i < k; ++i) {
    int best = 0;
    for (int c : cols) {
      int v = r(static_cast<std::size_t>(i), static_cast<std::size_t>(c));
      best = std::max(best, v);
      sum_all += v;
    }
    sum_max += best;
  }
  const long long num = d * sum_max - sum_all;
  const long long den = d * static_cast<long long>(k) * (k + 1);
  return static_cast<double>(num) / static_cast<double>(den);
}

// Madogram-based extremal coefficient from a scalar madogram value. The
// admissible range is [0, k/(k+1) - 1/2], the deterministic ceiling of the
// madogram over k blocks.
inline double ext_coeff_mad(double nu, int k) {
  if (k < 2) throw std::invalid_argument("need at least 2 blocks");
  // The ceiling k/(k+1) - 1/2 is evaluated as the exact ratio
  // (k-1)/(2k+2) with one division, so a madogram that attains the
  // ceiling (also one division of exact integers) is never rejected.
  const double bound = static_cast<double>(k - 1) / (2 * k + 2);
  if (!(nu >= 0.0) || nu > bound)
    throw std::invalid_argument("madogram value must lie in [0, " +
                                std::to_string(bound) + "], got " +
                                std::to_string(nu));
  return (0.5 + nu) / (0.5 - nu);
}

// Madogram-based extremal coefficient straight from ranks. Uses the same
// integer sums as madogram() and performs a single division of
// (den + 2 num) by (den - 2 num), so values that are exact in rational
// arithmetic, such as the saturation ceiling, come out exact in doubles too.
inline double ext_coeff_mad(const RankMatrix& r, std::span<const int> cols) {
  const int k = static_cast<int>(r.rows());
  const int q = static_cast<int>(r.cols());
  if (k < 2) throw std::invalid_argument("need at least 2 block rows");
  if (cols.empty()) throw std::invalid_argument("empty column set");
  for (int c : cols) detail::check_col(c, q);
  const long long d = static_cast<long long>(cols.size());
  long long sum_max = 0, sum_all = 0;
  for (int i = 0; i < k; ++i) {
    int best = 0;
    for (int c : cols) {
      int v = r(static_cast<std::size_t>(i), static_cast<std::size_t>(c));
      best = std::max(best, v);
      sum_all += v;
    }
    sum_max += best;
  }
  const long long num = d * sum_max - sum_all;
  const long long den = d * static_cast<long long>(k) * (k + 1);
  return static_cast<double>(den + 2 * num) / static_cast<double>(den - 2 * num);
}

}  // namespace tailclust
