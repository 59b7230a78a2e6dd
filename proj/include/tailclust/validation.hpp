#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailclust/clustering.hpp"
#include "tailclust/dataset.hpp"
#include "tailclust/models.hpp"
#include "tailclust/parallel.hpp"
#include "tailclust/partition.hpp"
#include "tailclust/rng.hpp"
#include "tailclust/tail.hpp"

namespace tailclust {

struct ContingencyTable {
  Matrix<long long> counts;           // clusters of p1 by clusters of p2
  std::vector<long long> row_sums;
  std::vector<long long> col_sums;
  long long total = 0;
};

inline ContingencyTable contingency(const Partition& p1, const Partition& p2) {
  if (p1.d != p2.d)
    throw std::invalid_argument("partitions cover different group counts: " +
                                std::to_string(p1.d) + " vs " +
                                std::to_string(p2.d));
  validate_partition(p1);
  validate_partition(p2);
  const std::vector<int> l1 = p1.labels(), l2 = p2.labels();
  ContingencyTable t;
  t.counts = Matrix<long long>(p1.clusters.size(), p2.clusters.size(), 0);
  for (int g = 0; g < p1.d; ++g)
    ++t.counts(static_cast<std::size_t>(l1[static_cast<std::size_t>(g)]),
               static_cast<std::size_t>(l2[static_cast<std::size_t>(g)]));
  t.row_sums.assign(p1.clusters.size(), 0);
  t.col_sums.assign(p2.clusters.size(), 0);
  for (std::size_t i = 0; i < t.counts.rows(); ++i)
    for (std::size_t j = 0; j < t.counts.cols(); ++j) {
      t.row_sums[i] += t.counts(i, j);
      t.col_sums[j] += t.counts(i, j);
      t.total += t.counts(i, j);
    }
  return t;
}

// Adjusted Rand index between two partitions of the same groups. All the
// ingredients are pair counts, so the index is a ratio of integers; it is
// evaluated with one final division and can be negative. Two partitions
// made entirely of singletons, or entirely of one cluster each, leave the
// index undefined.
inline double ari(const Partition& p1, const Partition& p2) {
  if (p1.d < 2)
    throw std::invalid_argument("adjusted Rand index needs at least 2 groups");
  const ContingencyTable t = contingency(p1, p2);
  auto choose2 = [](long long x) { return x * (x - 1) / 2; };
  long long r0 = 0, r1 = 0, r2 = 0;
  for (std::size_t i = 0; i < t.counts.rows(); ++i)
    for (std::size_t j = 0; j < t.counts.cols(); ++j)
      r0 += choose2(t.counts(i, j));
  for (long long s : t.row_sums) r1 += choose2(s);
  for (long long s : t.col_sums) r2 += choose2(s);

  const long long dd = static_cast<long long>(p1.d) *
                       (static_cast<long long>(p1.d) - 1);
  const long long num = r0 * dd - 2 * r1 * r2;
  const long long den = (r1 + r2) * dd / 2 - 2 * r1 * r2;
  if (den == 0) throw std::domain_error("ARI undefined");
  return static_cast<double>(num) / static_cast<double>(den);
}

// One grid point of the saturation experiment: estimates on independent
// uniform noise with the column count growing superlinearly in n, against
// the deterministic ceilings of both extremal coefficient estimators.
struct BoundsRow {
  int n = 0;
  int cols = 0;
  int k = 0;
  int m = 0;
  int blocks = 0;
  double theta_eks = 0.0;
  double eks_bound = 0.0;
  double nu = 0.0;
  double nu_bound = 0.0;
  double theta_mad = 0.0;
  double mad_bound = 0.0;

  bool ok() const {
    return theta_eks >= 1.0 && theta_eks <= eks_bound && nu <= nu_bound &&
           theta_mad >= 1.0 && theta_mad <= mad_bound;
  }
};

// Runs the saturation sweep: for each n in the grid, d = ceil(n^exponent)
// independent uniform columns, the rank estimator at k tail rows, and the
// madogram estimator on blocks of length m. Each grid point derives its own
// seed, so points can run in parallel in any order.
inline std::vector<BoundsRow> bounds_experiment(std::span<const int> n_grid,
                                                double exponent, int k, int m,
                                                std::uint64_t seed,
                                                int threads = 1) {
  if (n_grid.empty()) throw std::invalid_argument("empty n grid");
  if (!(exponent > 0.0))
    throw std::invalid_argument("exponent must be > 0");
  for (int n : n_grid) {
    if (n < 2) throw std::invalid_argument("grid values must be >= 2");
    TailParams{k, m}.validate(n);
  }

  std::vector<BoundsRow> rows(n_grid.size());
  parallel_for(n_grid.size(), threads, [&](std::size_t idx) {
    const int n = n_grid[idx];
    const int cols = static_cast<int>(
        std::ceil(std::pow(static_cast<double>(n), exponent)));
    const std::uint64_t point_seed =
        mix64(seed ^ mix64(static_cast<std::uint64_t>(n)));

    Matrix<double> values(static_cast<std::size_t>(n),
                          static_cast<std::size_t>(cols));
    for (int i = 0; i < n; ++i) {
      CounterRng rng(point_seed, static_cast<std::uint64_t>(i));
      for (int c = 0; c < cols; ++c)
        values(static_cast<std::size_t>(i), static_cast<std::size_t>(c)) =
            rng.next_double();
    }

    std::vector<int> all(static_cast<std::size_t>(cols));
    for (int c = 0; c < cols; ++c) all[static_cast<std::size_t>(c)] = c;

    BoundsRow row;
    row.n = n;
    row.cols = cols;
    row.k = k;
    row.m = m;
    row.blocks = n / m;
    row.theta_eks = ext_coeff_eks(rank_matrix(values), all, k);
    row.eks_bound = static_cast<double>(n) / k;

    const RankMatrix block_ranks = rank_matrix(block_maxima(values, m));
    row.nu = madogram(block_ranks, all);
    // Single exact-integer division: the subtraction form
    // blocks/(blocks+1) - 0.5 can round one ulp below the attainable
    // ceiling and falsely flag a madogram that sits exactly on it.
    row.nu_bound =
        static_cast<double>(row.blocks - 1) / (2 * row.blocks + 2);
    row.theta_mad = ext_coeff_mad(block_ranks, all);
    row.mad_bound = static_cast<double>(row.blocks);
    rows[idx] = row;
  });
  return rows;
}

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::vector<CheckResult> checks;

  int passed() const {
    int c = 0;
    for (const auto& r : checks) c += r.passed;
    return c;
  }
  int failed() const { return static_cast<int>(checks.size()) - passed(); }
  bool all_passed() const { return failed() == 0; }
};

namespace detail {

// Strictly increasing maps used to probe rank invariance. The choice per
// column is random but seeded.
inline void apply_random_monotone(Matrix<double>& values, CounterRng& rng) {
  const std::size_t n = values.rows();
  for (std::size_t c = 0; c < values.cols(); ++c) {
    const std::uint64_t pick = rng.next_u64() % 3;
    const double a = 0.5 + rng.next_double() * 4.0;
    const double b = rng.next_double() * 10.0 - 5.0;
    for (std::size_t i = 0; i < n; ++i) {
      double& v = values(i, c);
      switch (pick) {
        case 0: v = a * v + b; break;
        case 1: v = std::exp(v / static_cast<double>(n)); break;
        default: v = v * v * v; break;
      }
    }
  }
}

}  // namespace detail

// Structural checks of the pairwise excess estimates on one dataset:
// invariance under monotone margin transformations, equivariance under
// permuting groups and columns, symmetry, and the deterministic bounds of
// the excess quantities. Works on the ranks of the data, so the suite can
// synthesize values with the same ranks.
inline Report axiom_suite(const RankMatrix& r, const GroupLayout& layout,
                          int k, std::uint64_t seed = kDefaultSeed) {
  const int n = static_cast<int>(r.rows());
  const int q = static_cast<int>(r.cols());
  detail::check_k(k, n);
  layout.validate(q);
  const int d = layout.group_count();
  CounterRng rng(seed, 0xa71a5ULL);

  Report report;
  const SecoMatrix base = seco_matrix(r, layout, k);

  {
    // Monotone transforms of the margins must not move any estimate.
    Matrix<double> values(static_cast<std::size_t>(n),
                          static_cast<std::size_t>(q));
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < q; ++c)
        values(static_cast<std::size_t>(i), static_cast<std::size_t>(c)) =
            static_cast<double>(r(static_cast<std::size_t>(i),
                                  static_cast<std::size_t>(c)));
    detail::apply_random_monotone(values, rng);
    const SecoMatrix again = seco_matrix(rank_matrix(values), layout, k);
    const bool ok =
        again.entries == base.entries && again.thetas == base.thetas;
    report.checks.push_back({"monotone-margin-invariance", ok,
                             ok ? "" : "estimates moved under a strictly "
                                       "increasing margin transform"});
  }

  {
    // Relabeling groups and shuffling columns inside groups must permute
    // the matrix and nothing else.
    std::vector<int> perm(static_cast<std::size_t>(d));
    for (int g = 0; g < d; ++g) perm[static_cast<std::size_t>(g)] = g;
    for (int i = d - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(
          rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
    }
    GroupLayout shuffled;
    for (int g = 0; g < d; ++g) {
      auto cols = layout.groups[static_cast<std::size_t>(perm[
          static_cast<std::size_t>(g)])];
      for (std::size_t i = cols.size(); i > 1; --i) {
        const auto j =
            static_cast<std::size_t>(rng.next_u64() % static_cast<std::uint64_t>(i));
        std::swap(cols[i - 1], cols[j]);
      }
      shuffled.groups.push_back(std::move(cols));
    }
    const SecoMatrix moved = seco_matrix(r, shuffled, k);
    bool ok = true;
    for (int a = 0; a < d && ok; ++a)
      for (int b = 0; b < d && ok; ++b)
        ok = moved(a, b) == base(perm[static_cast<std::size_t>(a)],
                                 perm[static_cast<std::size_t>(b)]);
    for (int g = 0; g < d && ok; ++g)
      ok = moved.thetas[static_cast<std::size_t>(g)] ==
           base.thetas[static_cast<std::size_t>(perm[static_cast<std::size_t>(g)])];
    report.checks.push_back({"permutation-equivariance", ok,
                             ok ? "" : "estimates are not equivariant under "
                                       "group or column permutations"});
  }

  {
    bool ok = true;
    std::string detail;
    for (int a = 0; a < d && ok; ++a)
      for (int b = a + 1; b < d && ok; ++b) {
        const double ab = seco_pair(r, layout, a, b, k);
        const double ba = seco_pair(r, layout, b, a, k);
        if (ab != ba) {
          ok = false;
          detail = "asymmetry at pair (" + std::to_string(a) + ", " +
                   std::to_string(b) + ")";
        }
      }
    report.checks.push_back({"pair-symmetry", ok, detail});
  }

  {
    // 0 <= excess(a, b) <= min(theta(a), theta(b)), checked on the
    // underlying exceedance counts so the comparison is exact.
    bool ok = true;
    std::string detail;
    std::vector<RowSet> sets;
    for (int g = 0; g < d; ++g)
      sets.push_back(
          exceedance_rows(r, layout.groups[static_cast<std::size_t>(g)], k));
    for (int a = 0; a < d && ok; ++a)
      for (int b = a + 1; b < d && ok; ++b) {
        const int inter = RowSet::count_intersection(sets[
            static_cast<std::size_t>(a)], sets[static_cast<std::size_t>(b)]);
        const int ca = sets[static_cast<std::size_t>(a)].count();
        const int cb = sets[static_cast<std::size_t>(b)].count();
        if (inter < 0 || inter > std::min(ca, cb)) {
          ok = false;
          detail = "excess bound violated at pair (" + std::to_string(a) +
                   ", " + std::to_string(b) + ")";
        }
      }
    report.checks.push_back({"pair-excess-bounds", ok, detail});
  }

  {
    // Total excess of the singleton partition: nonnegative, and at most the
    // total of all but the largest group. Again exact on counts.
    long long sum = 0;
    int max_count = 0;
    RowSet all(n);
    std::vector<RowSet> sets;
    for (int g = 0; g < d; ++g) {
      sets.push_back(
          exceedance_rows(r, layout.groups[static_cast<std::size_t>(g)], k));
      const int c = sets.back().count();
      sum += c;
      max_count = std::max(max_count, c);
      all.or_with(sets.back());
    }
    const long long excess = sum - all.count();
    const bool ok = excess >= 0 && excess <= sum - max_count;
    report.checks.push_back({"total-excess-bounds", ok,
                             ok ? "" : "total excess outside [0, sum minus "
                                       "largest group]"});
  }

  return report;
}

// Default parameter grids for the model coherence sweep.
inline std::vector<double> default_mother_grid(ModelFamily f) {
  if (f == ModelFamily::kLogistic) return {0.91, 0.93, 0.95, 0.97, 0.99};
  return {6.0, 6.25, 6.5, 6.75, 7.0};
}

inline std::vector<double> default_child_grid(ModelFamily f) {
  std::vector<double> grid;
  if (f == ModelFamily::kLogistic) {
    for (int i = 1; i <= 90; ++i) grid.push_back(0.01 * i);
  } else {
    for (int i = 1; i <= 600; ++i) grid.push_back(0.01 * i);
  }
  return grid;
}

// For every unordered pair of child parameters, the model excess must fall
// strictly as the mother parameter moves toward independence. One check per
// child pair; a single-point mother grid passes vacuously.
inline Report coherence_levelsets(ModelFamily family,
                                  std::span<const double> mother_grid,
                                  std::span<const double> child_grid) {
  if (mother_grid.empty() || child_grid.empty())
    throw std::invalid_argument("empty parameter grid");
  std::vector<double> mothers(mother_grid.begin(), mother_grid.end());
  std::sort(mothers.begin(), mothers.end());
  if (family == ModelFamily::kLogistic) {
    for (double m : mothers)
      if (!(m > 0.0) || m > 1.0)
        throw std::invalid_argument("mother parameter must lie in (0, 1]");
    for (double c : child_grid)
      if (!(c > 0.0) || c > mothers.front())
        throw std::invalid_argument(
            "child grid violates nesting: " + std::to_string(c) +
            " exceeds the smallest mother parameter");
  } else {
    for (double m : mothers)
      if (!(m > 0.0))
        throw std::invalid_argument("mother parameter must be > 0");
    for (double c : child_grid)
      if (!(c > 0.0))
        throw std::invalid_argument("child parameter must be > 0");
  }

  Report report;
  for (std::size_t ia = 0; ia < child_grid.size(); ++ia)
    for (std::size_t ib = ia; ib < child_grid.size(); ++ib) {
      const double ca = child_grid[ia], cb = child_grid[ib];
      bool ok = true;
      double prev = 0.0;
      for (std::size_t im = 0; im < mothers.size(); ++im) {
        const double v = family == ModelFamily::kLogistic
                             ? seco_nested_logistic(mothers[im], ca, cb)
                             : seco_nested_hr(mothers[im], ca, cb);
        if (im > 0 && !(prev - v > 1e-12)) ok = false;
        prev = v;
      }
      char buf[64];
      std::snprintf(buf, sizeof(buf), "children (%g, %g)", ca, cb);
      report.checks.push_back(
          {buf, ok,
           ok ? "" : "excess not strictly decreasing across mother grid"});
    }
  return report;
}

}  // namespace tailclust
