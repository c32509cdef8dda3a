#include <gtest/gtest.h>

#include <fstream>

#include "kanto/cluster.hpp"
#include "kanto/dataset.hpp"
#include "kanto/error.hpp"
#include "kanto/pipeline.hpp"
#include "test_util.hpp"

using namespace kanto;
namespace fs = std::filesystem;

namespace {

void expect_same(const Dataset& a, const Dataset& b) {
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.stage, b.stage);
  EXPECT_EQ(a.revision, b.revision);
  EXPECT_EQ(a.reviewed_revision, b.reviewed_revision);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.failures, b.failures);
  EXPECT_EQ(a.song_level_embedding, b.song_level_embedding);
  EXPECT_EQ(a.embeddings, b.embeddings);
  EXPECT_EQ(a.global_embedding, b.global_embedding);
  EXPECT_EQ(a.checksums, b.checksums);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no kanto::Error thrown";
  return ErrorCode::internal;
}

}  // namespace

TEST(Dataset, SaveLoadRoundTripIsExact) {
  testutil::TempDir tmp;
  const Dataset ds = testutil::clustered_project(tmp.path(), testutil::small_population());
  const Dataset back = load_dataset(ds.dirs);
  expect_same(ds, back);
  EXPECT_EQ(back.stage, Stage::clustered);
  EXPECT_EQ(back.revision, 4u);

  // saving the loaded copy reproduces every artefact byte for byte
  const auto before = testutil::tree_contents(ds.dirs.segmented);
  const Dataset again = save_dataset(back);
  auto after = testutil::tree_contents(ds.dirs.segmented);
  EXPECT_EQ(again.revision, 5u);
  for (const auto& [path, bytes] : before) {
    if (path.find("manifest") != std::string::npos || path.find("history") != std::string::npos) continue;
    EXPECT_EQ(after.at(path), bytes) << path;
  }
  EXPECT_TRUE(fs::exists(ds.dirs.segmented / "history" / "manifest.4.json"));
}

TEST(Dataset, UnitSpectrogramsRoundTripBitExact) {
  testutil::TempDir tmp;
  const Parameters p;
  Dataset ds = testutil::built_project(tmp.path(), testutil::small_population(1));
  ds = save_dataset(segment_all(ds, p));
  const Dataset back = load_dataset(ds.dirs);
  std::size_t checked = 0;
  for (const auto& r : back.records) {
    ASSERT_EQ(r.status, RecordStatus::segmented);
    const FloatMatrix song = load_record_spectrogram(back, r);
    for (std::size_t k = 0; k < r.unit_spectrogram_refs.size(); ++k) {
      const FloatMatrix unit = read_kspec(back.dirs.root / r.unit_spectrogram_refs[k]);
      ASSERT_EQ(unit.rows, song.rows);
      const Spectrogram full = spectrogram_from_matrix(song, p);
      const long long a = time_to_frame_boundary(full, r.segmentation->onsets_s[k]);
      for (std::size_t b = 0; b < unit.rows; ++b)
        for (std::size_t t = 0; t < unit.cols; ++t)
          ASSERT_EQ(unit.at(b, t), song.at(b, static_cast<std::size_t>(a) + t));
      ++checked;
    }
  }
  EXPECT_GT(checked, 20u);
}

TEST(Dataset, TamperedArtefactNamesThePath) {
  testutil::TempDir tmp;
  Dataset ds = testutil::built_project(tmp.path(), testutil::small_population(1));
  ds = save_dataset(segment_all(ds, Parameters{}));
  const fs::path victim = ds.dirs.root / ds.records.front().spectrogram_ref;
  {
    std::fstream f(victim, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-1, std::ios::end);
    f.put('\x7f');
  }
  try {
    load_dataset(ds.dirs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::checksum);
    EXPECT_NE(std::string(e.what()).find(ds.records.front().spectrogram_ref), std::string::npos);
  }
}

TEST(Dataset, OtherFormatVersionIsRejected) {
  testutil::TempDir tmp;
  const Dataset ds = testutil::built_project(tmp.path(), testutil::small_population(1));
  const fs::path manifest = ds.dirs.segmented / "manifest.json";
  std::string text = testutil::read_bytes(manifest);
  const auto at = text.find("\"version\": 1");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 12, "\"version\": 7");
  testutil::write_text(manifest, text);
  EXPECT_EQ(code_of([&] { load_dataset(ds.dirs); }), ErrorCode::unsupported_version);
}

TEST(Dataset, MissingDatasetAndEarlyStagesAreStateErrors) {
  testutil::TempDir tmp;
  const auto dirs = init_project(tmp.path());
  EXPECT_EQ(code_of([&] { load_dataset(dirs); }), ErrorCode::state);
  const Dataset ds = testutil::built_project(tmp.path() / "p", testutil::small_population(1));
  EXPECT_EQ(code_of([&] { get_units(ds, Parameters{}); }), ErrorCode::state);
  EXPECT_EQ(code_of([&] { cluster_ids(ds, Parameters{}); }), ErrorCode::state);
  try {
    require_stage(ds, Stage::embedded);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("kanto"), std::string::npos);
  }
}

TEST(Dataset, RecordsJsonlRoundTrip) {
  testutil::TempDir tmp;
  const Dataset ds = testutil::clustered_project(tmp.path(), testutil::small_population(1));
  const std::string text = records_to_jsonl(ds.records);
  EXPECT_EQ(records_from_jsonl(text), ds.records);
  EXPECT_EQ(records_to_jsonl(records_from_jsonl(text)), text);
}

TEST(Export, StratifiedDeterministicAndExcludesNoise) {
  testutil::TempDir a, b;
  Dataset da = testutil::clustered_project(a.path(), testutil::small_population());
  Dataset db = testutil::clustered_project(b.path(), testutil::small_population());
  // one noise record and one without units
  da.records[0].cluster_label = -1;
  db.records[0].cluster_label = -1;
  da.records[1].status = RecordStatus::zero_units;
  db.records[1].status = RecordStatus::zero_units;

  const ExportSummary sa = export_training_set(da, 0.75, 9);
  const ExportSummary sb = export_training_set(db, 0.75, 9);
  EXPECT_EQ(sa.train + sa.test, da.records.size() - 2);
  EXPECT_EQ(sa.per_class, sb.per_class);
  EXPECT_EQ(testutil::tree_contents(da.dirs.output), testutil::tree_contents(db.dirs.output));
  for (const auto& [cls, counts] : sa.per_class) {
    const double n = static_cast<double>(counts.first + counts.second);
    EXPECT_EQ(counts.first, static_cast<std::size_t>(std::llround(0.75 * n))) << cls;
  }
  for (const auto& [path, bytes] : testutil::tree_contents(da.dirs.output)) {
    EXPECT_EQ(path.find(da.records[0].meta.id), std::string::npos);
    EXPECT_EQ(path.find(da.records[1].meta.id), std::string::npos);
  }
}

TEST(Export, RejectsUnlabelledAndBadFraction) {
  testutil::TempDir tmp;
  Dataset ds = testutil::clustered_project(tmp.path(), testutil::small_population(1));
  EXPECT_EQ(code_of([&] { export_training_set(ds, 1.0, 1); }), ErrorCode::validation);
  EXPECT_EQ(code_of([&] { export_training_set(ds, 0.0, 1); }), ErrorCode::validation);
  ds.records[2].cluster_label.reset();
  try {
    export_training_set(ds, 0.8, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::state);
    EXPECT_NE(std::string(e.what()).find(ds.records[2].meta.id), std::string::npos);
  }
}
