#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailclust/dataset.hpp"
#include "tailclust/partition.hpp"
#include "tailclust/rng.hpp"

namespace tailclust {

inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
}

// Stable tail dependence function of the logistic family,
// (sum_l x_l^(1/alpha))^alpha with alpha in (0, 1]. alpha = 1 is
// independence, alpha -> 0 complete dependence.
inline double stdf_logistic(std::span<const double> x, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("logistic parameter must lie in (0, 1], got " +
                                std::to_string(alpha));
  if (x.empty()) throw std::invalid_argument("empty coordinate vector");
  for (double v : x)
    if (!(v >= 0.0))
      throw std::invalid_argument("coordinates must be nonnegative");
  if (alpha == 1.0) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  double s = 0.0;
  for (double v : x) s += std::pow(v, 1.0 / alpha);
  return std::pow(s, alpha);
}

// Bivariate Huesler-Reiss stable tail dependence function with dependence
// parameter lambda > 0. Written with the log ratio inside the normal CDF;
// small lambda approaches the comonotone max(x1, x2), large lambda the
// independent sum.
inline double stdf_hr(double x1, double x2, double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("dependence parameter must be > 0, got " +
                                std::to_string(lambda));
  if (!(x1 >= 0.0) || !(x2 >= 0.0))
    throw std::invalid_argument("coordinates must be nonnegative");
  if (x1 == 0.0 && x2 == 0.0)
    throw std::invalid_argument("coordinates must not both be zero");
  if (x1 == 0.0) return x2;
  if (x2 == 0.0) return x1;
  const double half = 0.5 * lambda;
  const double logratio = std::log(x1 / x2) / lambda;
  return x1 * norm_cdf(half + logratio) + x2 * norm_cdf(half - logratio);
}

// Excess extremal coefficient of a two-group nested logistic model with
// mother parameter a0 and child parameters aa, ab:
//   2^aa + 2^ab - (2^(aa/a0) + 2^(ab/a0))^a0.
// Nesting requires the children to be at most the mother. The value is zero
// when a0 = 1 and grows as the mother moves toward dependence.
inline double seco_nested_logistic(double a0, double aa, double ab) {
  if (!(a0 > 0.0) || a0 > 1.0)
    throw std::invalid_argument("mother parameter must lie in (0, 1], got " +
                                std::to_string(a0));
  for (double a : {aa, ab})
    if (!(a > 0.0) || a > a0)
      throw std::invalid_argument(
          "child parameter must lie in (0, mother], got " + std::to_string(a));
  const double theta_a = std::exp2(aa);
  const double theta_b = std::exp2(ab);
  const double pooled =
      std::pow(std::exp2(aa / a0) + std::exp2(ab / a0), a0);
  return theta_a + theta_b - pooled;
}

// Excess extremal coefficient of a two-pair nested Huesler-Reiss model. Each
// pair contributes theta_j = 2 Phi(lambda_j / 2); the pooled coefficient is
// the mother stdf evaluated at the pair coefficients.
inline double seco_nested_hr(double l0, double la, double lb) {
  for (double l : {l0, la, lb})
    if (!(l > 0.0))
      throw std::invalid_argument("dependence parameter must be > 0, got " +
                                  std::to_string(l));
  const double theta_a = 2.0 * norm_cdf(0.5 * la);
  const double theta_b = 2.0 * norm_cdf(0.5 * lb);
  return theta_a + theta_b - stdf_hr(theta_a, theta_b, l0);
}

enum class ModelFamily { kLogistic, kHuslerReiss };

inline const char* family_name(ModelFamily f) {
  return f == ModelFamily::kLogistic ? "logistic" : "husler-reiss";
}

inline ModelFamily parse_family(const std::string& name) {
  if (name == "logistic") return ModelFamily::kLogistic;
  if (name == "husler-reiss" || name == "hr") return ModelFamily::kHuslerReiss;
  throw std::invalid_argument("unknown model family \"" + name +
                              "\" (expected logistic or husler-reiss)");
}

// Two-level model: a mother dependence parameter tying groups together and
// one child parameter per group. sizes[j] is the number of observed columns
// in group j.
struct NestedModelSpec {
  ModelFamily family = ModelFamily::kLogistic;
  double mother = 1.0;
  std::vector<double> children;
  std::vector<int> sizes;

  int group_count() const { return static_cast<int>(children.size()); }
  int total_columns() const {
    int t = 0;
    for (int s : sizes) t += s;
    return t;
  }
};

inline void validate_model_spec(const NestedModelSpec& spec) {
  if (spec.children.empty())
    throw std::invalid_argument("model spec has no groups");
  if (spec.children.size() != spec.sizes.size())
    throw std::invalid_argument(
        "model spec has " + std::to_string(spec.children.size()) +
        " child parameters but " + std::to_string(spec.sizes.size()) +
        " group sizes");
  for (int s : spec.sizes)
    if (s < 1)
      throw std::invalid_argument("group sizes must be >= 1, got " +
                                  std::to_string(s));
  if (spec.family == ModelFamily::kLogistic) {
    if (!(spec.mother > 0.0) || spec.mother > 1.0)
      throw std::invalid_argument("mother parameter must lie in (0, 1], got " +
                                  std::to_string(spec.mother));
    for (double a : spec.children)
      if (!(a > 0.0) || a > spec.mother)
        throw std::invalid_argument(
            "child parameter " + std::to_string(a) +
            " violates nesting; children must lie in (0, mother]");
  } else {
    if (!(spec.mother > 0.0))
      throw std::invalid_argument("mother parameter must be > 0, got " +
                                  std::to_string(spec.mother));
    for (double l : spec.children)
      if (!(l > 0.0))
        throw std::invalid_argument("child parameter must be > 0, got " +
                                    std::to_string(l));
  }
}

// Model extremal coefficient of a union of whole groups.
//
// Logistic: the stdf at an all-ones vector collapses to
// (sum_j p_j^(a_j/a0))^a0 over the groups j in the cluster.
//
// Huesler-Reiss: implemented for groups that are pairs, via
// theta_j = 2 Phi(lambda_j / 2), and for clusters of at most two groups,
// where the pooled value is the bivariate mother stdf at the pair
// coefficients.
inline double theta_model(const NestedModelSpec& spec,
                          std::span<const int> cluster) {
  validate_model_spec(spec);
  if (cluster.empty()) throw std::invalid_argument("empty cluster");
  const int d = spec.group_count();
  std::vector<int> seen(static_cast<std::size_t>(d), 0);
  for (int g : cluster) {
    if (g < 0 || g >= d)
      throw std::invalid_argument("group id " + std::to_string(g) +
                                  " is out of range for d=" +
                                  std::to_string(d));
    if (seen[static_cast<std::size_t>(g)]++)
      throw std::invalid_argument("group id " + std::to_string(g) +
                                  " repeated in cluster");
  }

  if (spec.family == ModelFamily::kLogistic) {
    double s = 0.0;
    for (int g : cluster) {
      const auto j = static_cast<std::size_t>(g);
      s += std::pow(static_cast<double>(spec.sizes[j]),
                    spec.children[j] / spec.mother);
    }
    return std::pow(s, spec.mother);
  }

  for (int g : cluster)
    if (spec.sizes[static_cast<std::size_t>(g)] != 2)
      throw std::invalid_argument(
          "Huesler-Reiss coefficients are implemented for groups of size 2");
  if (cluster.size() > 2)
    throw std::invalid_argument(
        "Huesler-Reiss coefficients are implemented for clusters of at most "
        "two groups");
  const double ta =
      2.0 * norm_cdf(0.5 * spec.children[static_cast<std::size_t>(cluster[0])]);
  if (cluster.size() == 1) return ta;
  const double tb =
      2.0 * norm_cdf(0.5 * spec.children[static_cast<std::size_t>(cluster[1])]);
  return stdf_hr(ta, tb, spec.mother);
}

namespace detail {

// Log of a positive alpha-stable draw (Laplace transform exp(-t^alpha)),
// by the Chambers-Mallows-Stuck construction. Working on the log scale keeps
// small alpha finite, where the raw draw overflows.
inline double positive_stable_log(CounterRng& rng, double alpha) {
  const double u = rng.next_open() * std::numbers::pi;
  const double w = rng.next_exp();
  return std::log(std::sin(alpha * u)) - std::log(std::sin(u)) / alpha +
         (1.0 - alpha) / alpha *
             (std::log(std::sin((1.0 - alpha) * u)) - std::log(w));
}

// One row of a nested logistic sample on uniform margins, written into
// out[0..q). Draw order per row is fixed: mother stable variate first, then
// per group its tilting variate followed by that group's coordinates. A
// stable variate with unit index is the constant 1 and consumes no draws,
// which keeps a one-group spec bitwise identical to the flat sampler.
inline void nested_logistic_row(CounterRng& rng, const NestedModelSpec& spec,
                                double* out) {
  const double a0 = spec.mother;
  const double ln_s0 = a0 < 1.0 ? positive_stable_log(rng, a0) : 0.0;
  std::size_t col = 0;
  for (std::size_t j = 0; j < spec.children.size(); ++j) {
    const double aj = spec.children[j];
    const double ratio = aj / a0;
    const double ln_t =
        ratio < 1.0 ? positive_stable_log(rng, ratio) : 0.0;
    const double ln_sj = (a0 / aj) * ln_s0 + ln_t;
    for (int l = 0; l < spec.sizes[j]; ++l) {
      const double ln_e = std::log(rng.next_exp());
      out[col++] = std::exp(-std::exp(aj * (ln_e - ln_sj)));
    }
  }
}

}  // namespace detail

// n rows from a p-variate logistic max-stable copula on uniform margins.
// Each row uses its own counter stream, so any row subset is reproducible
// independently of evaluation order.
inline Dataset sample_logistic(int n, int p, double alpha, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need at least 2 rows");
  if (p < 1) throw std::invalid_argument("need at least 1 column");
  NestedModelSpec flat;
  flat.family = ModelFamily::kLogistic;
  flat.mother = alpha;
  flat.children = {alpha};
  flat.sizes = {p};
  validate_model_spec(flat);

  Dataset ds;
  ds.values = Matrix<double>(static_cast<std::size_t>(n),
                             static_cast<std::size_t>(p));
  ds.layout.groups = {std::vector<int>(static_cast<std::size_t>(p))};
  for (int c = 0; c < p; ++c) ds.layout.groups[0][static_cast<std::size_t>(c)] = c;
  for (int i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    detail::nested_logistic_row(rng, flat, &ds.values.data()[
        static_cast<std::size_t>(i) * static_cast<std::size_t>(p)]);
  }
  return ds;
}

// n rows from a two-level nested logistic model on uniform margins, one
// group of columns per child parameter.
inline Dataset sample_nested_logistic(int n, const NestedModelSpec& spec,
                                      std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need at least 2 rows");
  validate_model_spec(spec);
  if (spec.family != ModelFamily::kLogistic)
    throw std::invalid_argument(
        std::string("sampling is not implemented for family ") +
        family_name(spec.family));

  const int q = spec.total_columns();
  Dataset ds;
  ds.values = Matrix<double>(static_cast<std::size_t>(n),
                             static_cast<std::size_t>(q));
  int col = 0;
  for (std::size_t j = 0; j < spec.sizes.size(); ++j) {
    std::vector<int> group;
    for (int l = 0; l < spec.sizes[j]; ++l) group.push_back(col++);
    ds.layout.groups.push_back(std::move(group));
  }
  for (int i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    detail::nested_logistic_row(rng, spec, &ds.values.data()[
        static_cast<std::size_t>(i) * static_cast<std::size_t>(q)]);
  }
  return ds;
}

struct BlockSample {
  Dataset data;
  Partition truth;  // which groups came from which independent block
};

// Concatenates independent nested logistic blocks column-wise and records
// the planted partition of the groups. Stream ids are row * G + block, so a
// single block reproduces sample_nested_logistic exactly.
inline BlockSample sample_ai_blocks(int n,
                                    const std::vector<NestedModelSpec>& blocks,
                                    std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need at least 2 rows");
  if (blocks.empty()) throw std::invalid_argument("need at least 1 block");
  int q = 0, d = 0;
  for (const auto& spec : blocks) {
    validate_model_spec(spec);
    if (spec.family != ModelFamily::kLogistic)
      throw std::invalid_argument(
          std::string("sampling is not implemented for family ") +
          family_name(spec.family));
    q += spec.total_columns();
    d += spec.group_count();
  }

  BlockSample out;
  out.data.values = Matrix<double>(static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(q));
  out.truth.d = d;
  out.truth.algorithm = "planted";

  const std::uint64_t g_count = blocks.size();
  int col = 0, group = 0;
  std::vector<int> block_col0(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    block_col0[b] = col;
    std::vector<int> truth_cluster;
    for (std::size_t j = 0; j < blocks[b].sizes.size(); ++j) {
      std::vector<int> cols;
      for (int l = 0; l < blocks[b].sizes[j]; ++l) cols.push_back(col++);
      out.data.layout.groups.push_back(std::move(cols));
      truth_cluster.push_back(group++);
    }
    out.truth.clusters.push_back(std::move(truth_cluster));
  }

  std::vector<double> row_buf(static_cast<std::size_t>(q));
  for (int i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i) * g_count + b);
      detail::nested_logistic_row(rng, blocks[b],
                                  row_buf.data() + block_col0[b]);
    }
    for (int c = 0; c < q; ++c)
      out.data.values(static_cast<std::size_t>(i),
                      static_cast<std::size_t>(c)) =
          row_buf[static_cast<std::size_t>(c)];
  }
  return out;
}

}  // namespace tailclust
