#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <random>

#include "kanto/error.hpp"
#include "kanto/labeld/journal.hpp"
#include "kanto/labeld/label_service.hpp"
#include "test_util.hpp"

using namespace kanto;
using namespace kanto::labeld;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no kanto::Error thrown";
  return ErrorCode::internal;
}

LabelEdit relabel(std::vector<std::string> songs, int label) {
  LabelEdit e;
  e.kind = EditKind::relabel;
  e.song_ids = std::move(songs);
  e.new_label = label;
  e.editor = "tester";
  e.timestamp = "2026-01-01T00:00:00Z";
  return e;
}

std::map<std::string, std::optional<int>> labels_of(const Dataset& ds) {
  std::map<std::string, std::optional<int>> out;
  for (const auto& r : ds.records) out[r.meta.id] = r.cluster_label;
  return out;
}

class LabelServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ds_ = testutil::clustered_project(tmp_.path(), testutil::small_population(2));
    dirs_ = ds_.dirs;
  }
  std::string song(std::size_t i) const { return ds_.records[i].meta.id; }

  testutil::TempDir tmp_;
  Dataset ds_;
  ProjectDirs dirs_;
};

}  // namespace

TEST(EditJson, RoundTrip) {
  LabelEdit e;
  e.kind = EditKind::merge_clusters;
  e.clusters = {{"B01", 2}, {"B01", 3}};
  e.new_label = 0;
  e.editor = "a";
  e.timestamp = "t";
  EXPECT_EQ(edit_from_json(edit_to_json(e)), e);
  const LabelEdit mixed = edit_from_json(
      R"({"kind":"mark_noise","targets":["s1",{"individual":"B02","label":1}],"editor":"x","timestamp":"y"})");
  EXPECT_EQ(mixed.song_ids, std::vector<std::string>{"s1"});
  EXPECT_EQ(mixed.clusters, (std::vector<ClusterRef>{{"B02", 1}}));
  EXPECT_EQ(mixed.new_label, -1);
}

TEST(EditJson, RejectsBadBodies) {
  EXPECT_EQ(code_of([] { edit_from_json("{"); }), ErrorCode::parse);
  EXPECT_EQ(code_of([] { edit_from_json(R"({"kind":"zap","targets":["a"],"new_label":1})"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([] { edit_from_json(R"({"kind":"relabel","targets":["a"]})"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([] { edit_from_json(R"({"kind":"relabel","targets":["a"],"new_label":-3})"); }),
            ErrorCode::validation);
  EXPECT_EQ(code_of([] { edit_from_json(R"({"kind":"relabel","targets":["a"],"new_label":1,"x":1})"); }),
            ErrorCode::validation);
  EXPECT_EQ(code_of([] { edit_from_json(R"({"kind":"merge_clusters","targets":["a"],"new_label":1})"); }),
            ErrorCode::validation);
  EXPECT_EQ(code_of([] {
              edit_from_json(R"({"kind":"merge_clusters","targets":[{"individual":"A","label":1}],"new_label":1})");
            }),
            ErrorCode::validation);
  EXPECT_EQ(code_of([] { edit_from_json(R"({"kind":"split_assign","targets":["a"],"new_label":-1})"); }),
            ErrorCode::validation);
}

TEST(Journal, AppendsAndReadsBack) {
  testutil::TempDir tmp;
  const fs::path path = tmp.path() / "j.jsonl";
  {
    Journal j(path, 7);
    EXPECT_EQ(j.append(relabel({"a"}, 1)), 0u);
    EXPECT_EQ(j.append(relabel({"b", "c"}, 2)), 1u);
  }
  Journal reopened(path, 99);
  EXPECT_EQ(reopened.base_revision(), 7u);
  EXPECT_EQ(reopened.size(), 2u);
  const auto c = read_journal(path);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->base_revision, 7u);
  ASSERT_EQ(c->edits.size(), 2u);
  EXPECT_EQ(c->edits[1], relabel({"b", "c"}, 2));
  EXPECT_FALSE(c->torn_tail);
  EXPECT_FALSE(read_journal(tmp.path() / "missing.jsonl"));
}

TEST(Journal, TornTailIsIgnoredAndCorruptionIsNot) {
  testutil::TempDir tmp;
  const fs::path path = tmp.path() / "j.jsonl";
  {
    Journal j(path, 1);
    j.append(relabel({"a"}, 1));
  }
  std::string text = testutil::read_bytes(path);
  testutil::write_text(path, text + R"({"kind":"relabel","targ)");
  auto c = read_journal(path);
  ASSERT_TRUE(c);
  EXPECT_TRUE(c->torn_tail);
  EXPECT_EQ(c->edits.size(), 1u);
  testutil::write_text(path, text + "garbage\n");
  EXPECT_EQ(code_of([&] { read_journal(path); }), ErrorCode::parse);
}

TEST_F(LabelServiceTest, ViewsReflectTheDataset) {
  LabelService svc(dirs_);
  const auto inds = svc.individuals();
  ASSERT_EQ(inds.size(), 2u);
  std::size_t songs = 0;
  for (const auto& i : inds) songs += i.song_count;
  EXPECT_EQ(songs, ds_.records.size());
  const auto cl = svc.clusters(inds[0].id);
  ASSERT_FALSE(cl.empty());
  std::size_t in_clusters = 0;
  for (const auto& c : cl) {
    in_clusters += c.size;
    EXPECT_LE(c.exemplar_song_ids.size(), 4u);
  }
  EXPECT_EQ(in_clusters, inds[0].song_count);
  const ItemPage first = svc.items(inds[0].id, cl[0].label, 1, 3);
  EXPECT_EQ(first.total, cl[0].size);
  EXPECT_EQ(first.total_pages, (cl[0].size + 2) / 3);
  EXPECT_LE(first.items.size(), 3u);
  const ItemPage beyond = svc.items(inds[0].id, cl[0].label, 100, 3);
  EXPECT_TRUE(beyond.items.empty());
  EXPECT_EQ(code_of([&] { svc.items(inds[0].id, 0, 0, 3); }), ErrorCode::validation);
  EXPECT_EQ(code_of([&] { svc.items(inds[0].id, 0, 1, 501); }), ErrorCode::validation);
  EXPECT_EQ(code_of([&] { svc.clusters("nobody"); }), ErrorCode::not_found);
  const auto png = svc.spectrogram_png(song(0));
  ASSERT_GT(png.size(), 8u);
  EXPECT_EQ(png[1], 'P');
  EXPECT_EQ(png[2], 'N');
  EXPECT_EQ(code_of([&] { svc.spectrogram_png("nope"); }), ErrorCode::not_found);
}

TEST_F(LabelServiceTest, RequiresClusteredDataset) {
  testutil::TempDir other;
  const Dataset built = testutil::built_project(other.path(), testutil::small_population(1));
  EXPECT_EQ(code_of([&] { LabelService s(built.dirs); }), ErrorCode::state);
}

TEST_F(LabelServiceTest, EditSemantics) {
  LabelService svc(dirs_);
  const std::string ind = ds_.records[0].meta.individual_id;
  const int a = *ds_.records[0].cluster_label;
  const auto before = svc.clusters(ind);
  ASSERT_GE(before.size(), 2u);
  const int b = before[0].label == a ? before[1].label : before[0].label;

  svc.apply(relabel({song(0)}, 9));
  EXPECT_EQ(svc.snapshot().find(song(0))->cluster_label, 9);
  EXPECT_EQ(svc.snapshot().find(song(0))->label_source, LabelSource::human);

  LabelEdit merge;
  merge.kind = EditKind::merge_clusters;
  merge.clusters = {{ind, a}};
  merge.new_label = b;
  svc.apply(merge);
  for (const auto& r : svc.snapshot().records)
    if (r.meta.individual_id == ind) EXPECT_NE(r.cluster_label, a);

  LabelEdit bad_merge = merge;
  bad_merge.clusters = {{ind, b}};
  bad_merge.new_label = 77;
  EXPECT_EQ(code_of([&] { svc.apply(bad_merge); }), ErrorCode::validation);

  LabelEdit noise;
  noise.kind = EditKind::mark_noise;
  noise.clusters = {{ind, 9}};
  svc.apply(noise);
  EXPECT_EQ(svc.snapshot().find(song(0))->cluster_label, -1);

  LabelEdit split;
  split.kind = EditKind::split_assign;
  split.song_ids = {song(0)};
  split.new_label = -1;
  EXPECT_EQ(code_of([&] { svc.apply(split); }), ErrorCode::validation);
  split.new_label = 5;
  svc.apply(split);
  EXPECT_EQ(svc.snapshot().find(song(0))->cluster_label, 5);
  EXPECT_EQ(svc.journal_size(), 4u);
}

TEST_F(LabelServiceTest, RejectedEditsLeaveNoTrace) {
  LabelService svc(dirs_);
  const auto journal_before = testutil::read_bytes(journal_path(dirs_));
  const auto labels_before = labels_of(svc.snapshot());
  EXPECT_EQ(code_of([&] { svc.apply(relabel({song(0), "ghost"}, 3)); }), ErrorCode::not_found);
  LabelEdit e;
  e.kind = EditKind::relabel;
  e.clusters = {{"B01", 1234}};
  e.new_label = 1;
  EXPECT_EQ(code_of([&] { svc.apply(e); }), ErrorCode::not_found);
  EXPECT_EQ(testutil::read_bytes(journal_path(dirs_)), journal_before);
  EXPECT_EQ(labels_of(svc.snapshot()), labels_before);
  EXPECT_EQ(svc.journal_size(), 0u);
}

TEST_F(LabelServiceTest, CrashAfterJournalWriteLosesNothing) {
  std::size_t acknowledged = 0;
  {
    LabelService svc(dirs_);
    svc.apply(relabel({song(1)}, 11));
    ++acknowledged;
    svc.after_journal_write = [](std::size_t) { throw std::runtime_error("simulated crash"); };
    EXPECT_THROW(svc.apply(relabel({song(2)}, 12)), std::runtime_error);
  }
  // an acknowledged edit survives, and so does the one journalled before the crash
  LabelService again(dirs_);
  EXPECT_EQ(again.journal_size(), acknowledged + 1);
  EXPECT_EQ(again.snapshot().find(song(1))->cluster_label, 11);
  EXPECT_EQ(again.snapshot().find(song(2))->cluster_label, 12);
}

TEST_F(LabelServiceTest, ReplayMatchesIndependentLabelModel) {
  // the model: song -> label, with each edit expressed directly on it
  auto model = labels_of(ds_);
  std::map<std::string, std::string> owner;
  for (const auto& r : ds_.records) owner[r.meta.id] = r.meta.individual_id;

  std::mt19937_64 rng(17);
  LabelService svc(dirs_);
  std::size_t applied = 0;
  for (int step = 0; applied < 10 && step < 200; ++step) {
    std::uniform_int_distribution<std::size_t> pick_song(0, ds_.records.size() - 1);
    std::uniform_int_distribution<int> pick_kind(0, 2), pick_label(0, 4);
    const std::string s = song(pick_song(rng));
    const int kind = pick_kind(rng);
    LabelEdit e;
    if (kind == 0) {
      e = relabel({s, song(pick_song(rng))}, pick_label(rng));
      for (const auto& id : e.song_ids) model[id] = e.new_label;
    } else if (kind == 1) {
      if (!model[s]) continue;
      e.kind = EditKind::mark_noise;
      e.clusters = {{owner[s], *model[s]}};
      if (*model[s] < 0) continue;
      for (auto& [id, l] : model)
        if (owner[id] == owner[s] && l == e.clusters[0].label) l = -1;
    } else {
      e.kind = EditKind::split_assign;
      e.song_ids = {s};
      e.new_label = pick_label(rng);
      if (model[s] == e.new_label) continue;
      model[s] = e.new_label;
    }
    EXPECT_EQ(svc.apply(e), applied);
    ++applied;
  }
  ASSERT_EQ(applied, 10u);
  EXPECT_EQ(labels_of(svc.snapshot()), model);
  LabelService restarted(dirs_);
  EXPECT_EQ(labels_of(restarted.snapshot()), model);
  EXPECT_EQ(restarted.journal_size(), 10u);
}

TEST_F(LabelServiceTest, ExportSnapshotsAndIsIdempotent) {
  LabelService svc(dirs_);
  const std::uint64_t base = svc.revision();
  svc.apply(relabel({song(3)}, 8));
  const std::uint64_t snap = svc.export_reviewed();
  EXPECT_EQ(snap, base + 1);
  EXPECT_EQ(svc.export_reviewed(), snap);
  EXPECT_EQ(svc.journal_size(), 0u);
  EXPECT_TRUE(fs::exists(dirs_.segmented / "history" / ("journal." + std::to_string(base) + ".jsonl")));
  const Dataset saved = load_dataset(dirs_);
  EXPECT_EQ(saved.revision, snap);
  EXPECT_EQ(saved.reviewed_revision, snap);
  EXPECT_EQ(saved.find(song(3))->cluster_label, 8);
  EXPECT_EQ(saved.find(song(3))->label_source, LabelSource::human);
  // a restart sees the snapshot and an empty journal
  LabelService again(dirs_);
  EXPECT_EQ(again.journal_size(), 0u);
  EXPECT_EQ(labels_of(again.snapshot()), labels_of(saved));
}

TEST_F(LabelServiceTest, ExportWithoutEditsKeepsLabels) {
  LabelService svc(dirs_);
  const std::uint64_t snap = svc.export_reviewed();
  EXPECT_EQ(labels_of(load_dataset(dirs_)), labels_of(ds_));
  EXPECT_EQ(svc.export_reviewed(), snap);
}

TEST_F(LabelServiceTest, CompactFoldsPendingJournal) {
  {
    LabelService svc(dirs_);
    svc.apply(relabel({song(4)}, 6));
  }
  const auto rev = compact_journal(dirs_);
  ASSERT_TRUE(rev);
  EXPECT_FALSE(fs::exists(journal_path(dirs_)));
  const Dataset ds = load_dataset(dirs_);
  EXPECT_EQ(ds.revision, *rev);
  EXPECT_EQ(ds.find(song(4))->cluster_label, 6);
  EXPECT_FALSE(compact_journal(dirs_));
}

TEST_F(LabelServiceTest, StaleJournalIsArchivedNotReplayed) {
  {
    LabelService svc(dirs_);
    svc.apply(relabel({song(5)}, 13));
  }
  // the dataset moves on without the journal (e.g. re-clustered)
  save_dataset(load_dataset(dirs_));
  LabelService svc(dirs_);
  EXPECT_EQ(svc.journal_size(), 0u);
  EXPECT_NE(svc.snapshot().find(song(5))->cluster_label, 13);
  EXPECT_TRUE(fs::exists(dirs_.segmented / "history" / ("journal." + std::to_string(ds_.revision) + ".jsonl")));
}
