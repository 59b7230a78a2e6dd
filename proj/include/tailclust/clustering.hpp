#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailclust/matrix.hpp"
#include "tailclust/parallel.hpp"
#include "tailclust/partition.hpp"
#include "tailclust/rng.hpp"
#include "tailclust/tail.hpp"

namespace tailclust {

namespace detail {

inline void check_square_symmetric(const Matrix<double>& m,
                                   const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument(std::string(what) + " matrix must be square");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != m(j, i))
        throw std::invalid_argument(
            std::string(what) + " matrix is not symmetric at (" +
            std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
}

}  // namespace detail

// Greedy threshold clustering on a normalized pairwise excess matrix.
// Repeatedly takes the most dependent remaining pair; everything still
// unassigned whose link to both pair members clears tau joins that cluster.
// When even the best pair falls at or below tau, its first member becomes a
// singleton. Ties on the best pair go to the lexicographically smallest
// index pair.
inline Partition caice(const Matrix<double>& theta, double tau) {
  detail::check_square_symmetric(theta, "similarity");
  if (!(tau > 0.0))
    throw std::invalid_argument("threshold must be > 0, got " +
                                std::to_string(tau));
  const int d = static_cast<int>(theta.rows());

  Partition out;
  out.d = d;
  out.algorithm = "caice";
  out.tau = tau;

  std::vector<int> active(static_cast<std::size_t>(d));
  for (int g = 0; g < d; ++g) active[static_cast<std::size_t>(g)] = g;

  while (!active.empty()) {
    if (active.size() == 1) {
      out.clusters.push_back({active[0]});
      active.clear();
      break;
    }
    int best_a = -1, best_b = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t ia = 0; ia + 1 < active.size(); ++ia)
      for (std::size_t ib = ia + 1; ib < active.size(); ++ib) {
        const double v = theta(static_cast<std::size_t>(active[ia]),
                               static_cast<std::size_t>(active[ib]));
        if (v > best) {
          best = v;
          best_a = active[ia];
          best_b = active[ib];
        }
      }

    std::vector<int> cluster;
    if (best <= tau) {
      cluster.push_back(best_a);
    } else {
      for (int s : active) {
        const double va = s == best_a ? 1.0
                                      : theta(static_cast<std::size_t>(best_a),
                                              static_cast<std::size_t>(s));
        const double vb = s == best_b ? 1.0
                                      : theta(static_cast<std::size_t>(best_b),
                                              static_cast<std::size_t>(s));
        if (std::min(va, vb) >= tau) cluster.push_back(s);
      }
    }
    std::vector<int> rest;
    rest.reserve(active.size() - cluster.size());
    for (int s : active)
      if (!std::binary_search(cluster.begin(), cluster.end(), s))
        rest.push_back(s);
    active = std::move(rest);
    out.clusters.push_back(std::move(cluster));
  }
  out.normalize();
  return out;
}

inline Partition caice(const SecoMatrix& theta, double tau) {
  return caice(theta.entries, tau);
}

// The threshold sweep used when no tau is given: 0.05 to 0.12 in steps of
// 0.0025.
inline std::vector<double> default_tau_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 28; ++i) grid.push_back(0.05 + 0.0025 * i);
  return grid;
}

struct TauCurve {
  std::vector<double> grid;
  std::vector<double> seco;  // partition excess at each threshold
  std::vector<double> loss;  // log(1 + excess above the sweep minimum)
  double best_tau = 0.0;
  Partition best_partition;
};

// Sweeps the threshold grid, scoring each caice partition by its total
// excess re-estimated at k_loss tail rows. The loss at each threshold is
// log1p of the gap to the best excess over the sweep, so the minimizer has
// loss exactly zero. Ties pick the smallest threshold.
inline TauCurve select_tau(const RankMatrix& r, const GroupLayout& layout,
                           const SecoMatrix& theta,
                           std::span<const double> grid, int k_loss,
                           int threads = 1) {
  if (grid.empty()) throw std::invalid_argument("empty threshold grid");
  for (double t : grid)
    if (!(t > 0.0))
      throw std::invalid_argument("thresholds must be > 0, got " +
                                  std::to_string(t));
  detail::check_k(k_loss, static_cast<int>(r.rows()));

  TauCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.seco.resize(grid.size());
  curve.loss.resize(grid.size());
  std::vector<Partition> parts(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    parts[i] = caice(theta, grid[i]);
    curve.seco[i] = seco_partition(r, layout, parts[i], k_loss);
  });

  double best_seco = curve.seco[0];
  for (double s : curve.seco) best_seco = std::min(best_seco, s);
  std::size_t best = 0;
  bool found = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    curve.loss[i] = std::log1p(curve.seco[i] - best_seco);
    if (!found && curve.seco[i] == best_seco) {
      best = i;
      found = true;
    }
  }
  curve.best_tau = curve.grid[best];
  curve.best_partition = parts[best];
  return curve;
}

// 1 - entries, with a zero diagonal. The clustering baselines below work on
// this dissimilarity scale.
inline Matrix<double> dissimilarity_from(const SecoMatrix& theta) {
  Matrix<double> out(theta.entries.rows(), theta.entries.cols());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j)
      out(i, j) = i == j ? 0.0 : 1.0 - theta.entries(i, j);
  return out;
}

enum class Linkage { kAverage, kSingle, kComplete };

inline const char* linkage_name(Linkage l) {
  switch (l) {
    case Linkage::kAverage: return "average";
    case Linkage::kSingle: return "single";
    default: return "complete";
  }
}

inline Linkage parse_linkage(const std::string& name) {
  if (name == "average") return Linkage::kAverage;
  if (name == "single") return Linkage::kSingle;
  if (name == "complete") return Linkage::kComplete;
  throw std::invalid_argument("unknown linkage \"" + name +
                              "\" (expected average, single or complete)");
}

namespace detail {

inline void check_dissimilarity(const Matrix<double>& dissim) {
  check_square_symmetric(dissim, "dissimilarity");
  for (std::size_t i = 0; i < dissim.rows(); ++i) {
    if (dissim(i, i) != 0.0)
      throw std::invalid_argument("dissimilarity diagonal must be zero");
    for (std::size_t j = 0; j < dissim.cols(); ++j)
      if (!(dissim(i, j) >= 0.0))
        throw std::invalid_argument("dissimilarities must be nonnegative");
  }
}

}  // namespace detail

// Agglomerative clustering down to K clusters. Clusters are keyed by their
// smallest member; merge ties go to the smallest such key pair, so the
// result is deterministic. Average linkage is the size-weighted
// Lance-Williams update.
inline Partition hclust(const Matrix<double>& dissim, int K,
                        Linkage linkage = Linkage::kAverage) {
  detail::check_dissimilarity(dissim);
  const int d = static_cast<int>(dissim.rows());
  if (K < 1 || K > d)
    throw std::invalid_argument("cluster count must be in [1, " +
                                std::to_string(d) + "], got " +
                                std::to_string(K));

  Matrix<double> dist = dissim;
  std::vector<std::vector<int>> members(static_cast<std::size_t>(d));
  std::vector<bool> alive(static_cast<std::size_t>(d), true);
  for (int g = 0; g < d; ++g) members[static_cast<std::size_t>(g)] = {g};

  for (int live = d; live > K; --live) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
      if (!alive[static_cast<std::size_t>(i)]) continue;
      for (int j = i + 1; j < d; ++j) {
        if (!alive[static_cast<std::size_t>(j)]) continue;
        const double v =
            dist(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    const double ni = static_cast<double>(members[static_cast<std::size_t>(bi)].size());
    const double nj = static_cast<double>(members[static_cast<std::size_t>(bj)].size());
    for (int t = 0; t < d; ++t) {
      if (!alive[static_cast<std::size_t>(t)] || t == bi || t == bj) continue;
      const double dit =
          dist(static_cast<std::size_t>(bi), static_cast<std::size_t>(t));
      const double djt =
          dist(static_cast<std::size_t>(bj), static_cast<std::size_t>(t));
      double merged;
      switch (linkage) {
        case Linkage::kSingle: merged = std::min(dit, djt); break;
        case Linkage::kComplete: merged = std::max(dit, djt); break;
        default: merged = (ni * dit + nj * djt) / (ni + nj); break;
      }
      dist(static_cast<std::size_t>(bi), static_cast<std::size_t>(t)) = merged;
      dist(static_cast<std::size_t>(t), static_cast<std::size_t>(bi)) = merged;
    }
    auto& mi = members[static_cast<std::size_t>(bi)];
    auto& mj = members[static_cast<std::size_t>(bj)];
    mi.insert(mi.end(), mj.begin(), mj.end());
    mj.clear();
    alive[static_cast<std::size_t>(bj)] = false;
  }

  Partition out;
  out.d = d;
  out.algorithm = std::string("hclust-") + linkage_name(linkage);
  out.K = K;
  for (int g = 0; g < d; ++g)
    if (alive[static_cast<std::size_t>(g)])
      out.clusters.push_back(std::move(members[static_cast<std::size_t>(g)]));
  out.normalize();
  return out;
}

// K-medoids by alternating assignment and medoid refresh, seeded with a
// random distinct medoid draw. Assignment ties go to the smaller medoid id,
// medoid ties to the smaller member id. The total within-cluster cost never
// increases, which also bounds the number of sweeps; trace, when given,
// records the cost after every sweep.
inline Partition kmedoids(const Matrix<double>& dissim, int K,
                          std::uint64_t seed,
                          std::vector<double>* trace = nullptr) {
  detail::check_dissimilarity(dissim);
  const int d = static_cast<int>(dissim.rows());
  if (K < 1 || K > d)
    throw std::invalid_argument("cluster count must be in [1, " +
                                std::to_string(d) + "], got " +
                                std::to_string(K));

  // Partial Fisher-Yates draw of K distinct start medoids.
  CounterRng rng(seed, 0);
  std::vector<int> pool(static_cast<std::size_t>(d));
  for (int g = 0; g < d; ++g) pool[static_cast<std::size_t>(g)] = g;
  for (int i = 0; i < K; ++i) {
    const auto j = static_cast<std::size_t>(
        i + static_cast<int>(rng.next_u64() %
                             static_cast<std::uint64_t>(d - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  std::vector<int> medoids(pool.begin(), pool.begin() + K);
  std::sort(medoids.begin(), medoids.end());

  std::vector<int> assign(static_cast<std::size_t>(d));
  double prev_cost = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < 1000; ++sweep) {
    double cost = 0.0;
    for (int g = 0; g < d; ++g) {
      int best_m = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int m = 0; m < K; ++m) {
        const double v = dissim(static_cast<std::size_t>(g),
                                static_cast<std::size_t>(medoids[
                                    static_cast<std::size_t>(m)]));
        if (v < best) {
          best = v;
          best_m = m;
        }
      }
      assign[static_cast<std::size_t>(g)] = best_m;
      cost += best;
    }
    if (trace) trace->push_back(cost);
    if (cost > prev_cost + 1e-12)
      throw std::logic_error("k-medoids cost increased");
    prev_cost = cost;

    bool changed = false;
    for (int m = 0; m < K; ++m) {
      int best_g = medoids[static_cast<std::size_t>(m)];
      double best = std::numeric_limits<double>::infinity();
      for (int g = 0; g < d; ++g) {
        if (assign[static_cast<std::size_t>(g)] != m) continue;
        double s = 0.0;
        for (int h = 0; h < d; ++h)
          if (assign[static_cast<std::size_t>(h)] == m)
            s += dissim(static_cast<std::size_t>(g),
                        static_cast<std::size_t>(h));
        if (s < best) {
          best = s;
          best_g = g;
        }
      }
      if (best_g != medoids[static_cast<std::size_t>(m)]) {
        medoids[static_cast<std::size_t>(m)] = best_g;
        changed = true;
      }
    }
    // Keeping medoids sorted pins assignment ties to the smallest medoid id.
    std::sort(medoids.begin(), medoids.end());
    if (!changed) break;
  }

  Partition out;
  out.d = d;
  out.algorithm = "kmedoids";
  out.K = K;
  out.clusters.resize(static_cast<std::size_t>(K));
  for (int g = 0; g < d; ++g)
    out.clusters[static_cast<std::size_t>(assign[static_cast<std::size_t>(g)])]
        .push_back(g);
  // A medoid at distance zero from another can end up with no members; drop
  // such empty clusters rather than emit an invalid partition.
  std::erase_if(out.clusters, [](const auto& c) { return c.empty(); });
  out.normalize();
  return out;
}

struct SilhouetteResult {
  std::vector<double> values;  // one score per group id
  double average = 0.0;
};

// Silhouette scores against a dissimilarity matrix. Members of singleton
// clusters score zero by convention.
inline SilhouetteResult silhouette(const Matrix<double>& dissim,
                                   const Partition& p) {
  detail::check_dissimilarity(dissim);
  const int d = static_cast<int>(dissim.rows());
  if (p.d != d)
    throw std::invalid_argument("partition is over " + std::to_string(p.d) +
                                " groups but matrix has " + std::to_string(d));
  validate_partition(p);
  if (p.cluster_count() < 2)
    throw std::invalid_argument(
        "silhouette needs at least 2 clusters, got " +
        std::to_string(p.cluster_count()));

  const std::vector<int> labels = p.labels();
  SilhouetteResult out;
  out.values.resize(static_cast<std::size_t>(d), 0.0);
  for (int g = 0; g < d; ++g) {
    const auto own = static_cast<std::size_t>(labels[static_cast<std::size_t>(g)]);
    if (p.clusters[own].size() == 1) continue;
    double a = 0.0;
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < p.clusters.size(); ++c) {
      double s = 0.0;
      for (int h : p.clusters[c])
        s += dissim(static_cast<std::size_t>(g), static_cast<std::size_t>(h));
      if (c == own)
        a = s / static_cast<double>(p.clusters[c].size() - 1);
      else
        b = std::min(b, s / static_cast<double>(p.clusters[c].size()));
    }
    const double denom = std::max(a, b);
    out.values[static_cast<std::size_t>(g)] =
        denom == 0.0 ? 0.0 : (b - a) / denom;
  }
  double total = 0.0;
  for (double v : out.values) total += v;
  out.average = total / static_cast<double>(d);
  return out;
}

enum class ClusterMethod { kHclust, kKmedoids };

struct KSelection {
  int best_K = 0;
  std::vector<int> candidates;
  std::vector<double> averages;
  Partition best_partition;
};

// Picks the cluster count with the highest average silhouette over a
// candidate range, smallest count on ties.
inline KSelection choose_k(const Matrix<double>& dissim,
                           std::span<const int> k_range, ClusterMethod method,
                           std::uint64_t seed = kDefaultSeed,
                           Linkage linkage = Linkage::kAverage) {
  detail::check_dissimilarity(dissim);
  const int d = static_cast<int>(dissim.rows());
  if (k_range.empty()) throw std::invalid_argument("empty candidate range");
  for (int K : k_range)
    if (K < 2 || K > d)
      throw std::invalid_argument("candidate cluster counts must lie in [2, " +
                                  std::to_string(d) + "], got " +
                                  std::to_string(K));

  KSelection out;
  out.candidates.assign(k_range.begin(), k_range.end());
  std::sort(out.candidates.begin(), out.candidates.end());
  out.candidates.erase(
      std::unique(out.candidates.begin(), out.candidates.end()),
      out.candidates.end());

  double best = -std::numeric_limits<double>::infinity();
  for (int K : out.candidates) {
    Partition p = method == ClusterMethod::kHclust
                      ? hclust(dissim, K, linkage)
                      : kmedoids(dissim, K, seed);
    const double avg = silhouette(dissim, p).average;
    out.averages.push_back(avg);
    if (avg > best) {
      best = avg;
      out.best_K = K;
      out.best_partition = std::move(p);
    }
  }
  return out;
}

}  // namespace tailclust
