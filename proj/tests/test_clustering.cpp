#include <cmath>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tailclust/clustering.hpp"
#include "tailclust/dataset.hpp"
#include "tailclust/tail.hpp"

using Catch::Approx;
using tailclust::Linkage;
using tailclust::Matrix;
using tailclust::Partition;

namespace {

Matrix<double> sym(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix<double> m(rows.size(), rows.size());
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix<double> two_block_affinity() {
  return sym({{1.0, 0.9, 0.1, 0.1},
              {0.9, 1.0, 0.1, 0.1},
              {0.1, 0.1, 1.0, 0.8},
              {0.1, 0.1, 0.8, 1.0}});
}

Matrix<double> random_affinity(std::mt19937_64& rng, int d) {
  Matrix<double> m(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int a = 0; a < d; ++a) {
    m(static_cast<std::size_t>(a), static_cast<std::size_t>(a)) = 1.0;
    for (int b = a + 1; b < d; ++b) {
      const double v = unif(rng);
      m(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = v;
      m(static_cast<std::size_t>(b), static_cast<std::size_t>(a)) = v;
    }
  }
  return m;
}

}  // namespace

TEST_CASE("greedy threshold clustering on a two-block affinity") {
  const Matrix<double> m = two_block_affinity();

  SECTION("moderate threshold recovers the blocks") {
    const Partition p = tailclust::caice(m, 0.5);
    REQUIRE(p.cluster_count() == 2);
    CHECK(p.clusters[0] == std::vector<int>{0, 1});
    CHECK(p.clusters[1] == std::vector<int>{2, 3});
    CHECK(p.algorithm == "caice");
    REQUIRE(p.tau.has_value());
    CHECK(*p.tau == 0.5);
    CHECK_FALSE(p.K.has_value());
  }
  SECTION("threshold above every link isolates everything") {
    const Partition p = tailclust::caice(m, 0.95);
    CHECK(p.cluster_count() == 4);
    for (int g = 0; g < 4; ++g)
      CHECK(p.clusters[static_cast<std::size_t>(g)] == std::vector<int>{g});
  }
  SECTION("threshold below every link merges everything") {
    const Partition p = tailclust::caice(m, 0.05);
    REQUIRE(p.cluster_count() == 1);
    CHECK(p.clusters[0] == std::vector<int>{0, 1, 2, 3});
  }
}

TEST_CASE("greedy threshold clustering tie and admission rules") {
  SECTION("equal best links seed from the smallest pair") {
    const Matrix<double> m = sym({{1.0, 0.9, 0.2, 0.2},
                                  {0.9, 1.0, 0.2, 0.2},
                                  {0.2, 0.2, 1.0, 0.9},
                                  {0.2, 0.2, 0.9, 1.0}});
    const Partition p = tailclust::caice(m, 0.5);
    REQUIRE(p.cluster_count() == 2);
    CHECK(p.clusters[0] == std::vector<int>{0, 1});
  }
  SECTION("membership needs a strong link to both seeds") {
    // Group 2 is tied to 0 but not to 1, so it stays out of the seed pair's
    // cluster.
    const Matrix<double> m = sym({{1.0, 0.9, 0.8, 0.1},
                                  {0.9, 1.0, 0.1, 0.1},
                                  {0.8, 0.1, 1.0, 0.1},
                                  {0.1, 0.1, 0.1, 1.0}});
    const Partition p = tailclust::caice(m, 0.5);
    REQUIRE(p.cluster_count() == 3);
    CHECK(p.clusters[0] == std::vector<int>{0, 1});
    CHECK(p.clusters[1] == std::vector<int>{2});
    CHECK(p.clusters[2] == std::vector<int>{3});
  }
  SECTION("a weak best link closes the seed as a singleton") {
    const Matrix<double> m = sym({{1.0, 0.3, 0.2},
                                  {0.3, 1.0, 0.2},
                                  {0.2, 0.2, 1.0}});
    const Partition p = tailclust::caice(m, 0.5);
    CHECK(p.cluster_count() == 3);
  }
}

TEST_CASE("greedy threshold clustering argument checks") {
  const Matrix<double> m = two_block_affinity();
  CHECK_THROWS_AS(tailclust::caice(m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(tailclust::caice(m, -0.5), std::invalid_argument);

  Matrix<double> rect(3, 4);
  CHECK_THROWS_AS(tailclust::caice(rect, 0.5), std::invalid_argument);

  Matrix<double> asym = two_block_affinity();
  asym(0, 1) = 0.95;
  CHECK_THROWS_AS(tailclust::caice(asym, 0.5), std::invalid_argument);
}

TEST_CASE("greedy threshold clustering always yields a valid partition") {
  std::mt19937_64 rng(4401);
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  for (int t = 0; t < 60; ++t) {
    const int d = 2 + static_cast<int>(rng() % 12);
    const Matrix<double> m = random_affinity(rng, d);
    const Partition p = tailclust::caice(m, unif(rng));
    CHECK_NOTHROW(tailclust::validate_partition(p));
  }
}

TEST_CASE("matrix overload of the threshold clustering matches") {
  std::mt19937_64 rng(4402);
  tailclust::SecoMatrix sm;
  sm.dim = 5;
  sm.k = 10;
  sm.entries = random_affinity(rng, 5);
  sm.thetas = {1.1, 1.2, 1.3, 1.4, 1.5};
  const Partition a = tailclust::caice(sm, 0.4);
  const Partition b = tailclust::caice(sm.entries, 0.4);
  CHECK(a.clusters == b.clusters);
}

TEST_CASE("default threshold grid") {
  const std::vector<double> grid = tailclust::default_tau_grid();
  REQUIRE(grid.size() == 29);
  CHECK(grid.front() == 0.05);
  CHECK(grid.back() == Approx(0.12).margin(1e-12));
  for (std::size_t i = 1; i < grid.size(); ++i)
    CHECK(grid[i] - grid[i - 1] == Approx(0.0025).margin(1e-12));
}

TEST_CASE("threshold selection minimizes the partition excess") {
  // Two tight pairs plus noise between them: low thresholds merge the
  // pairs and raise the score, high thresholds keep them separate.
  std::mt19937_64 rng(4403);
  const int n = 400;
  tailclust::Matrix<double> v(n, 4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const double s1 = unif(rng), s2 = unif(rng);
    v(static_cast<std::size_t>(i), 0) = s1 + 0.001 * unif(rng);
    v(static_cast<std::size_t>(i), 1) = s1 + 0.001 * unif(rng);
    v(static_cast<std::size_t>(i), 2) = s2 + 0.001 * unif(rng);
    v(static_cast<std::size_t>(i), 3) = s2 + 0.001 * unif(rng);
  }
  tailclust::GroupLayout layout;
  layout.groups = {{0}, {1}, {2}, {3}};
  const tailclust::RankMatrix r = tailclust::rank_matrix(v);
  const int k = 50;
  const tailclust::SecoMatrix theta = tailclust::seco_matrix(r, layout, k);

  const std::vector<double> grid = tailclust::default_tau_grid();
  const tailclust::TauCurve curve =
      tailclust::select_tau(r, layout, theta, grid, 30);

  REQUIRE(curve.grid.size() == grid.size());
  REQUIRE(curve.seco.size() == grid.size());
  REQUIRE(curve.loss.size() == grid.size());

  double best = curve.seco[0];
  for (double s : curve.seco) best = std::min(best, s);
  std::size_t first_best = 0;
  while (curve.loss[first_best] != 0.0) ++first_best;
  CHECK(curve.best_tau == curve.grid[first_best]);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(curve.loss[i] == Approx(std::log1p(curve.seco[i] - best)).margin(1e-15));

  // The scoring at the best threshold reproduces the reported partition.
  const Partition direct = tailclust::caice(theta, curve.best_tau);
  CHECK(direct.clusters == curve.best_partition.clusters);
}

TEST_CASE("threshold selection is identical across thread counts") {
  std::mt19937_64 rng(4404);
  const int n = 200, q = 8, k = 40;
  tailclust::Matrix<double> v(n, q);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t c = 0; c < v.cols(); ++c) v(i, c) = unif(rng);
  tailclust::GroupLayout layout;
  layout.groups = {{0, 1}, {2}, {3, 4}, {5}, {6, 7}};
  const tailclust::RankMatrix r = tailclust::rank_matrix(v);
  const tailclust::SecoMatrix theta = tailclust::seco_matrix(r, layout, k);
  const std::vector<double> grid = tailclust::default_tau_grid();

  const tailclust::TauCurve one =
      tailclust::select_tau(r, layout, theta, grid, 30, 1);
  const tailclust::TauCurve six =
      tailclust::select_tau(r, layout, theta, grid, 30, 6);
  CHECK(one.seco == six.seco);
  CHECK(one.best_tau == six.best_tau);
  CHECK(one.best_partition.clusters == six.best_partition.clusters);
}

TEST_CASE("dissimilarity transform") {
  tailclust::SecoMatrix sm;
  sm.dim = 3;
  sm.k = 5;
  sm.entries = sym({{1.0, 0.75, 0.25},
                    {0.75, 1.0, 0.5},
                    {0.25, 0.5, 1.0}});
  sm.thetas = {1.0, 1.0, 1.0};
  const Matrix<double> d = tailclust::dissimilarity_from(sm);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(1, 1) == 0.0);
  CHECK(d(2, 2) == 0.0);
  CHECK(d(0, 1) == 0.25);
  CHECK(d(0, 2) == 0.75);
  CHECK(d(1, 2) == 0.5);
}

TEST_CASE("agglomerative clustering on a line of points") {
  // Distances on a path graph separate the linkages: single linkage chains
  // from the left while complete and average prefer the balanced split.
  const Matrix<double> d = sym({{0.0, 1.0, 2.0, 3.0},
                                {1.0, 0.0, 1.0, 2.0},
                                {2.0, 1.0, 0.0, 1.0},
                                {3.0, 2.0, 1.0, 0.0}});

  const Partition single = tailclust::hclust(d, 2, Linkage::kSingle);
  REQUIRE(single.cluster_count() == 2);
  CHECK(single.clusters[0] == std::vector<int>{0, 1, 2});
  CHECK(single.clusters[1] == std::vector<int>{3});
  CHECK(single.algorithm == "hclust-single");

  const Partition complete = tailclust::hclust(d, 2, Linkage::kComplete);
  REQUIRE(complete.cluster_count() == 2);
  CHECK(complete.clusters[0] == std::vector<int>{0, 1});
  CHECK(complete.clusters[1] == std::vector<int>{2, 3});

  const Partition average = tailclust::hclust(d, 2, Linkage::kAverage);
  REQUIRE(average.cluster_count() == 2);
  CHECK(average.clusters[0] == std::vector<int>{0, 1});
  CHECK(average.clusters[1] == std::vector<int>{2, 3});
  CHECK(average.algorithm == "hclust-average");
  REQUIRE(average.K.has_value());
  CHECK(*average.K == 2);
}

TEST_CASE("agglomerative clustering edge cluster counts") {
  const Matrix<double> d = sym({{0.0, 1.0, 2.0},
                                {1.0, 0.0, 1.5},
                                {2.0, 1.5, 0.0}});
  const Partition all = tailclust::hclust(d, 3);
  CHECK(all.cluster_count() == 3);
  const Partition one = tailclust::hclust(d, 1);
  REQUIRE(one.cluster_count() == 1);
  CHECK(one.clusters[0] == std::vector<int>{0, 1, 2});
  CHECK_THROWS_AS(tailclust::hclust(d, 0), std::invalid_argument);
  CHECK_THROWS_AS(tailclust::hclust(d, 4), std::invalid_argument);
}

TEST_CASE("average linkage weights clusters by size") {
  // Merging {0,1} first, the distance to point 3 must average the two
  // member distances: (4 + 2) / 2 = 3 beats d(2,3) = 2.8, so 2 joins 3.
  const Matrix<double> d = sym({{0.0, 0.5, 3.5, 4.0},
                                {0.5, 0.0, 3.3, 2.0},
                                {3.5, 3.3, 0.0, 2.8},
                                {4.0, 2.0, 2.8, 0.0}});
  const Partition p = tailclust::hclust(d, 2, Linkage::kAverage);
  REQUIRE(p.cluster_count() == 2);
  CHECK(p.clusters[0] == std::vector<int>{0, 1});
  CHECK(p.clusters[1] == std::vector<int>{2, 3});
}

TEST_CASE("dissimilarity validation for the baselines") {
  Matrix<double> bad = sym({{0.0, 1.0}, {1.0, 0.0}});
  bad(0, 0) = 0.1;
  CHECK_THROWS_AS(tailclust::hclust(bad, 1), std::invalid_argument);

  Matrix<double> neg = sym({{0.0, -0.2}, {-0.2, 0.0}});
  CHECK_THROWS_AS(tailclust::hclust(neg, 1), std::invalid_argument);

  Matrix<double> asym = sym({{0.0, 1.0}, {0.5, 0.0}});
  CHECK_THROWS_AS(tailclust::hclust(asym, 1), std::invalid_argument);
}

TEST_CASE("k-medoids recovers separated blocks") {
  const Matrix<double> d = sym({{0.0, 0.1, 0.9, 0.9, 0.8},
                                {0.1, 0.0, 0.9, 0.8, 0.9},
                                {0.9, 0.9, 0.0, 0.1, 0.2},
                                {0.9, 0.8, 0.1, 0.0, 0.1},
                                {0.8, 0.9, 0.2, 0.1, 0.0}});
  for (std::uint64_t seed : {1ULL, 7ULL, 42ULL, 1234ULL}) {
    const Partition p = tailclust::kmedoids(d, 2, seed);
    REQUIRE(p.cluster_count() == 2);
    CHECK(p.clusters[0] == std::vector<int>{0, 1});
    CHECK(p.clusters[1] == std::vector<int>{2, 3, 4});
    CHECK(p.algorithm == "kmedoids");
    REQUIRE(p.K.has_value());
    CHECK(*p.K == 2);
  }
}

TEST_CASE("k-medoids determinism and edge cases") {
  std::mt19937_64 rng(4405);
  Matrix<double> d(6, 6);
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b) {
      const double v = a == b ? 0.0
                              : 0.1 + 0.9 * std::uniform_real_distribution<double>(
                                                0.0, 1.0)(rng);
      d(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = v;
      d(static_cast<std::size_t>(b), static_cast<std::size_t>(a)) = v;
    }

  const Partition p1 = tailclust::kmedoids(d, 3, 9);
  const Partition p2 = tailclust::kmedoids(d, 3, 9);
  CHECK(p1.clusters == p2.clusters);

  const Partition all = tailclust::kmedoids(d, 6, 5);
  CHECK(all.cluster_count() == 6);

  CHECK_THROWS_AS(tailclust::kmedoids(d, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(tailclust::kmedoids(d, 7, 1), std::invalid_argument);
}

TEST_CASE("k-medoids tolerates duplicate points") {
  // Points 0 and 1 coincide; a medoid can end up with nothing assigned to
  // it, and the result must still be a valid partition.
  const Matrix<double> dd = sym({{0.0, 0.0, 1.0, 1.0},
                                 {0.0, 0.0, 1.0, 1.0},
                                 {1.0, 1.0, 0.0, 0.5},
                                 {1.0, 1.0, 0.5, 0.0}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Partition p = tailclust::kmedoids(dd, 3, seed);
    CHECK_NOTHROW(tailclust::validate_partition(p));
    CHECK(p.cluster_count() <= 3);
  }
}

TEST_CASE("k-medoids runs on many random instances") {
  std::mt19937_64 rng(4406);
  for (int t = 0; t < 40; ++t) {
    const int d = 3 + static_cast<int>(rng() % 10);
    Matrix<double> m(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        const double v = a == b ? 0.0
                                : std::uniform_real_distribution<double>(
                                      0.01, 1.0)(rng);
        m(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = v;
        m(static_cast<std::size_t>(b), static_cast<std::size_t>(a)) = v;
      }
    const int K = 1 + static_cast<int>(rng() % static_cast<unsigned>(d));
    const Partition p = tailclust::kmedoids(m, K, rng());
    CHECK_NOTHROW(tailclust::validate_partition(p));
    CHECK(p.cluster_count() <= K);
  }
}

TEST_CASE("silhouette on a hand-checked configuration") {
  const Matrix<double> d = sym({{0.0, 0.1, 0.9, 0.9},
                                {0.1, 0.0, 0.9, 0.9},
                                {0.9, 0.9, 0.0, 0.2},
                                {0.9, 0.9, 0.2, 0.0}});
  Partition p;
  p.d = 4;
  p.clusters = {{0, 1}, {2, 3}};
  const tailclust::SilhouetteResult res = tailclust::silhouette(d, p);
  REQUIRE(res.values.size() == 4);
  CHECK(res.values[0] == Approx((0.9 - 0.1) / 0.9).epsilon(1e-14));
  CHECK(res.values[1] == Approx((0.9 - 0.1) / 0.9).epsilon(1e-14));
  CHECK(res.values[2] == Approx((0.9 - 0.2) / 0.9).epsilon(1e-14));
  CHECK(res.values[3] == Approx((0.9 - 0.2) / 0.9).epsilon(1e-14));
  const double mean = (2.0 * (0.9 - 0.1) / 0.9 + 2.0 * (0.9 - 0.2) / 0.9) / 4.0;
  CHECK(res.average == Approx(mean).epsilon(1e-14));
}

TEST_CASE("silhouette of singletons and bad partitions") {
  const Matrix<double> d = sym({{0.0, 0.4, 0.6},
                                {0.4, 0.0, 0.5},
                                {0.6, 0.5, 0.0}});
  Partition p;
  p.d = 3;
  p.clusters = {{0}, {1, 2}};
  const tailclust::SilhouetteResult res = tailclust::silhouette(d, p);
  CHECK(res.values[0] == 0.0);

  Partition one;
  one.d = 3;
  one.clusters = {{0, 1, 2}};
  CHECK_THROWS_AS(tailclust::silhouette(d, one), std::invalid_argument);
}

TEST_CASE("silhouette values stay within the unit interval") {
  std::mt19937_64 rng(4407);
  for (int t = 0; t < 30; ++t) {
    const int d = 4 + static_cast<int>(rng() % 8);
    Matrix<double> m(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        const double v = a == b ? 0.0
                                : std::uniform_real_distribution<double>(
                                      0.01, 1.0)(rng);
        m(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = v;
        m(static_cast<std::size_t>(b), static_cast<std::size_t>(a)) = v;
      }
    std::vector<int> labels(static_cast<std::size_t>(d));
    for (auto& l : labels) l = static_cast<int>(rng() % 3);
    const Partition p = oracle::partition_from_labels(labels);
    if (p.cluster_count() < 2) continue;
    const tailclust::SilhouetteResult res = tailclust::silhouette(m, p);
    for (double s : res.values) {
      CHECK(s >= -1.0);
      CHECK(s <= 1.0);
    }
  }
}

TEST_CASE("cluster count selection by silhouette") {
  // Three well separated blocks of sizes 2, 2, 3.
  Matrix<double> d(7, 7);
  const std::vector<int> block{0, 0, 1, 1, 2, 2, 2};
  std::mt19937_64 rng(4408);
  for (int a = 0; a < 7; ++a)
    for (int b = a; b < 7; ++b) {
      double v = 0.0;
      if (a != b)
        v = block[static_cast<std::size_t>(a)] ==
                    block[static_cast<std::size_t>(b)]
                ? 0.05 + 0.05 * std::uniform_real_distribution<double>(
                                    0.0, 1.0)(rng)
                : 0.8 + 0.1 * std::uniform_real_distribution<double>(
                                  0.0, 1.0)(rng);
      d(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = v;
      d(static_cast<std::size_t>(b), static_cast<std::size_t>(a)) = v;
    }

  const std::vector<int> range{2, 3, 4, 5};
  const tailclust::KSelection hsel = tailclust::choose_k(
      d, range, tailclust::ClusterMethod::kHclust);
  CHECK(hsel.best_K == 3);
  REQUIRE(hsel.candidates.size() == 4);
  REQUIRE(hsel.averages.size() == 4);
  CHECK(hsel.best_partition.cluster_count() == 3);
  CHECK(hsel.best_partition.clusters[0] == std::vector<int>{0, 1});
  CHECK(hsel.best_partition.clusters[1] == std::vector<int>{2, 3});
  CHECK(hsel.best_partition.clusters[2] == std::vector<int>{4, 5, 6});

  const tailclust::KSelection msel = tailclust::choose_k(
      d, range, tailclust::ClusterMethod::kKmedoids, 17);
  CHECK(msel.best_K == 3);
  CHECK(msel.best_partition.clusters == hsel.best_partition.clusters);
}

TEST_CASE("cluster count selection validates its candidate range") {
  const Matrix<double> d = sym({{0.0, 0.9, 0.9},
                                {0.9, 0.0, 0.9},
                                {0.9, 0.9, 0.0}});
  // Duplicates and ordering are normalized, but every entry must already
  // lie in [2, d]; anything outside is a caller error, not a hint.
  const std::vector<int> range{3, 2, 3};
  const tailclust::KSelection sel = tailclust::choose_k(
      d, range, tailclust::ClusterMethod::kHclust);
  REQUIRE(sel.candidates == std::vector<int>{2, 3});
  REQUIRE(sel.averages.size() == 2);

  for (const std::vector<int>& bad :
       {std::vector<int>{1, 2}, std::vector<int>{2, 9}, std::vector<int>{}}) {
    CHECK_THROWS_AS(tailclust::choose_k(d, bad,
                                        tailclust::ClusterMethod::kHclust),
                    std::invalid_argument);
  }
}

TEST_CASE("linkage names round trip") {
  CHECK(tailclust::parse_linkage("average") == Linkage::kAverage);
  CHECK(tailclust::parse_linkage("single") == Linkage::kSingle);
  CHECK(tailclust::parse_linkage("complete") == Linkage::kComplete);
  CHECK_THROWS_AS(tailclust::parse_linkage("ward"), std::invalid_argument);
  CHECK(std::string(tailclust::linkage_name(Linkage::kAverage)) == "average");
}
