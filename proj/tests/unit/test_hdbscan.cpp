#include <gtest/gtest.h>

#include <random>

#include "kanto/error.hpp"
#include "kanto/hdbscan.hpp"
#include "oracles.hpp"

using namespace kanto;

namespace {

// Random points in a few loose blobs so that instances actually split.
std::vector<std::vector<double>> random_instance(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::uniform_int_distribution<int> blobs(1, 4);
  std::uniform_real_distribution<double> centre(-10.0, 10.0);
  std::uniform_real_distribution<double> spread(0.3, 2.5);
  const int k = blobs(rng);
  std::vector<std::vector<double>> centres(k, std::vector<double>(dim));
  std::vector<double> spreads(k);
  for (int b = 0; b < k; ++b) {
    for (double& c : centres[b]) c = centre(rng);
    spreads[b] = spread(rng);
  }
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& p : pts) {
    const int b = pick(rng);
    for (std::size_t d = 0; d < dim; ++d) p[d] = centres[b][d] + spreads[b] * g(rng);
  }
  return pts;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& pts) {
  std::vector<double> out;
  for (const auto& p : pts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

TEST(Hdbscan, MatchesExhaustiveReferenceOnSmallInstances) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(6, 30);
  std::uniform_int_distribution<std::size_t> dims(1, 3);
  int compared = 0, with_clusters = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    const std::size_t n = size(rng);
    const std::size_t dim = dims(rng);
    std::uniform_int_distribution<std::size_t> mcs_pick(2, std::min<std::size_t>(6, n));
    const std::size_t mcs = mcs_pick(rng);
    const auto pts = random_instance(rng, n, dim);
    const auto ref = oracle::level_set_hdbscan(pts, mcs);
    if (!ref.distinct_levels || !ref.unique_optimum) continue;
    const auto coords = flatten(pts);
    const HdbscanResult got = hdbscan_cluster(coords, dim, mcs);
    ASSERT_EQ(got.labels, ref.labels) << "trial " << trial << " n=" << n << " mcs=" << mcs;
    ASSERT_EQ(got.selected.size(), ref.selected.size());
    for (std::size_t s = 0; s < got.selected.size(); ++s) {
      double best = -1.0;
      // stabilities compared as a multiset; selected ids need not share an order
      for (const auto& [members, stab] : ref.selected)
        if (std::abs(stab - got.stability[got.selected[s] - n]) < 1e-9 * std::max(1.0, stab)) best = stab;
      EXPECT_GE(best, 0.0) << "trial " << trial;
    }
    ++compared;
    with_clusters += got.cluster_count > 0;
  }
  EXPECT_GE(compared, 300);
  EXPECT_GE(with_clusters, 150);
}

TEST(Hdbscan, LabelsNumberedByLowestPoint) {
  // two tight groups, the second listed first
  const std::vector<double> coords{10, 10.1, 0, 10.2, 0.1, 0.2, 10.3, 0.3};
  const HdbscanResult r = hdbscan_cluster(coords, 1, 3);
  ASSERT_EQ(r.cluster_count, 2u);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 0, 1, 0, 1, 1, 0, 1}));
  for (double s : r.membership_strength) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Hdbscan, IdenticalPointsFormOneCluster) {
  const std::vector<double> coords(20 * 2, 1.5);
  const HdbscanResult r = hdbscan_cluster(coords, 2, 5);
  EXPECT_EQ(r.cluster_count, 1u);
  EXPECT_EQ(r.labels, std::vector<int>(20, 0));
}

TEST(Hdbscan, TooFewPointsIsAllNoise) {
  const std::vector<double> coords{0, 1, 2};
  const HdbscanResult r = hdbscan_cluster(coords, 1, 5);
  EXPECT_TRUE(r.too_few_points);
  EXPECT_EQ(r.cluster_count, 0u);
  EXPECT_EQ(r.labels, std::vector<int>(3, -1));
}

TEST(Hdbscan, MinClusterSizeBelowTwoIsParameterError) {
  const std::vector<double> coords{0, 1, 2, 3};
  try {
    hdbscan_cluster(coords, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parameter);
  }
}

TEST(Hdbscan, Deterministic) {
  std::mt19937_64 rng(8);
  const auto coords = flatten(random_instance(rng, 300, 3));
  const HdbscanResult a = hdbscan_cluster(coords, 3, 8);
  const HdbscanResult b = hdbscan_cluster(coords, 3, 8);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.membership_strength, b.membership_strength);
}

TEST(AdjustedRand, HandValue) {
  // contingency [[2,0,0],[0,1,1]]: index 1, expected 2*1/6, max 3/2
  const std::vector<int> a{0, 0, 1, 1}, b{0, 0, 1, 2};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, b), 0.5714285714285715);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, a), 1.0);
}

TEST(AdjustedRand, MatchesPairCounting) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<int> n_pick(2, 60), k_pick(1, 6);
    const int n = n_pick(rng);
    std::uniform_int_distribution<int> la(-1, k_pick(rng)), lb(-1, k_pick(rng));
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = la(rng);
      b[i] = lb(rng);
    }
    EXPECT_NEAR(adjusted_rand_index(a, b), oracle::pair_counting_ari(a, b), 1e-12);
  }
}
