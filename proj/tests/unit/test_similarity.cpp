#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kanto/error.hpp"
#include "kanto/pipeline.hpp"
#include "kanto/similarity.hpp"
#include "test_util.hpp"

using namespace kanto;

namespace {

std::vector<SongVector> random_songs(std::size_t birds, const std::vector<int>& years, std::size_t per, std::size_t dim,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<SongVector> out;
  for (std::size_t b = 0; b < birds; ++b) {
    std::vector<double> centre(dim);
    for (double& c : centre) c = 3.0 * g(rng);
    for (int y : years)
      for (std::size_t s = 0; s < per; ++s) {
        SongVector v;
        v.song_id = "B" + std::to_string(b) + "_" + std::to_string(y) + "_" + std::to_string(s);
        v.individual_id = "B" + std::to_string(b);
        v.year = y;
        v.label = static_cast<int>(s % 2);
        for (double c : centre) v.vector.push_back(c + 0.2 * g(rng));
        out.push_back(v);
      }
  }
  return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace

TEST(Similarity, MatchesDoubleLoop) {
  const auto songs = random_songs(5, {2020, 2021}, 6, 12, 1);
  for (std::size_t threads : {1u, 2u, 8u}) {
    const SimilarityMatrix m = pairwise_similarity(songs, threads);
    ASSERT_EQ(m.size, songs.size());
    for (std::size_t i = 0; i < songs.size(); ++i)
      for (std::size_t j = 0; j < songs.size(); ++j) {
        const double expected = i == j ? 1.0 : cosine(songs[i].vector, songs[j].vector);
        ASSERT_NEAR(m.at(i, j), expected, 1e-8);
        ASSERT_EQ(m.at(i, j), m.at(j, i));
      }
  }
}

TEST(Similarity, ZeroVectorsExcluded) {
  auto songs = random_songs(2, {2020}, 3, 4, 2);
  songs[1].vector.assign(4, 0.0);
  const SimilarityMatrix m = pairwise_similarity(songs);
  EXPECT_EQ(m.size, songs.size() - 1);
  EXPECT_EQ(m.excluded, std::vector<std::string>{songs[1].song_id});
  std::vector<SongVector> lonely(songs.begin(), songs.begin() + 2);
  EXPECT_THROW(pairwise_similarity(lonely), Error);
}

TEST(ReId, PartitionsCoverEveryPairOnce) {
  const auto songs = random_songs(4, {2019, 2020, 2021}, 3, 6, 3);
  const ReIdReport r = cross_year_reid(pairwise_similarity(songs));
  const std::size_t n = songs.size();
  EXPECT_EQ(r.within_individual_within_year.size() + r.within_individual_across_year.size() + r.across_individuals.size(),
            n * (n - 1) / 2);
  EXPECT_EQ(r.within_individual_within_year.size(), 4u * 3u * 3u);
  EXPECT_EQ(r.within_individual_across_year.size(), 4u * 3u * 9u);
  EXPECT_EQ(r.trials.size(), 8u);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.chance_individuals, 0.25);
  ASSERT_TRUE(r.chance_song_types.has_value());
  EXPECT_DOUBLE_EQ(*r.chance_song_types, 1.0 / 8.0);  // (bird, label) pairs among candidates
}

TEST(ReId, MatchesBruteForceArgmax) {
  const auto songs = random_songs(6, {2020, 2021}, 4, 3, 4);  // low dim: some mistakes
  const SimilarityMatrix m = pairwise_similarity(songs);
  const ReIdReport r = cross_year_reid(m);
  ASSERT_EQ(r.trials.size(), 6u);
  std::size_t correct = 0;
  for (const auto& t : r.trials) {
    double best = -2.0;
    std::string who;
    for (std::size_t i = 0; i < m.size; ++i) {
      if (m.index[i].individual_id != t.individual_id || m.index[i].year != t.year) continue;
      for (std::size_t j = 0; j < m.size; ++j)
        if (m.index[j].year == t.year + 1 && m.at(i, j) > best) {
          best = m.at(i, j);
          who = m.index[j].individual_id;
        }
    }
    EXPECT_EQ(t.predicted_individual, who);
    EXPECT_DOUBLE_EQ(t.score, best);
    correct += who == t.individual_id;
  }
  EXPECT_DOUBLE_EQ(r.accuracy, static_cast<double>(correct) / 6.0);
}

TEST(ReId, ScalingVectorsChangesNothing) {
  auto songs = random_songs(4, {2020, 2021}, 3, 5, 5);
  const ReIdReport a = cross_year_reid(pairwise_similarity(songs));
  for (std::size_t i = 0; i < songs.size(); ++i)
    for (double& v : songs[i].vector) v *= 0.5 + static_cast<double>(i);
  const ReIdReport b = cross_year_reid(pairwise_similarity(songs));
  ASSERT_EQ(a.trials.size(), b.trials.size());
  for (std::size_t t = 0; t < a.trials.size(); ++t) {
    EXPECT_EQ(a.trials[t].predicted_individual, b.trials[t].predicted_individual);
    EXPECT_EQ(a.trials[t].matched_song_id, b.trials[t].matched_song_id);
  }
}

TEST(ReId, SingleBirdIsTrivial) {
  const ReIdReport r = cross_year_reid(pairwise_similarity(random_songs(1, {2020, 2021}, 3, 4, 6)));
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_TRUE(r.trials[0].correct);
  EXPECT_DOUBLE_EQ(r.chance_individuals, 1.0);
  EXPECT_TRUE(r.across_individuals.empty());
}

TEST(ReId, OneYearIsValidationError) {
  try {
    cross_year_reid(pairwise_similarity(random_songs(3, {2020}, 3, 4, 7)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
  }
}

TEST(ReId, BirdWithoutFollowingYearIsExcluded) {
  auto songs = random_songs(3, {2020, 2021}, 2, 4, 8);
  std::erase_if(songs, [](const SongVector& v) { return v.individual_id == "B2" && v.year == 2021; });
  const ReIdReport r = cross_year_reid(pairwise_similarity(songs));
  EXPECT_EQ(r.trials.size(), 2u);
  EXPECT_EQ(r.excluded, std::vector<std::string>{"B2"});
}

TEST(KernelDensity, IntegratesToOne) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.2, 0.1);
  std::vector<double> values(300);
  for (double& v : values) v = g(rng);
  std::vector<double> grid;
  for (int i = 0; i <= 4000; ++i) grid.push_back(-1.0 + 2.0 * i / 4000.0);
  const auto d = kernel_density(values, grid);
  double area = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) area += 0.5 * (d[i] + d[i - 1]) * (grid[i] - grid[i - 1]);
  EXPECT_NEAR(area, 1.0, 1e-3);
  for (double v : d) EXPECT_GE(v, 0.0);
}

TEST(SongVectors, NeedSharedEmbeddingAndAverageUnits) {
  testutil::TempDir tmp;
  Parameters p;
  p.song_level = false;
  const Dataset built = testutil::built_project(tmp.path(), testutil::small_population(1), p);
  EXPECT_THROW(song_vectors(built), Error);
  Dataset ds = segment_all(built, p);
  ds = embed_dataset(ds, p).dataset;
  const SongVectorTable t = song_vectors(ds);
  ASSERT_EQ(t.songs.size(), ds.records.size());
  const EmbeddingTable& g = *ds.global_embedding;
  const auto& first = t.songs.front();
  std::vector<double> mean(g.values.cols, 0.0);
  std::size_t rows = 0;
  for (std::size_t i = 0; i < g.owners.size(); ++i) {
    if (g.owners[i].song_id != first.song_id) continue;
    for (std::size_t c = 0; c < g.values.cols; ++c) mean[c] += g.values.at(i, c);
    ++rows;
  }
  ASSERT_GT(rows, 1u);
  for (std::size_t c = 0; c < mean.size(); ++c) EXPECT_NEAR(first.vector[c], mean[c] / rows, 1e-12);
}
