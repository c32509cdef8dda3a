#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "kanto/cli.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome kanto_run(std::vector<std::string> args) {
  args.insert(args.begin(), "kanto");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = kanto::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

void run_ok(const std::vector<std::string>& args) {
  const Outcome o = kanto_run(args);
  ASSERT_EQ(o.status, 0) << o.err;
}

void full_pipeline(const fs::path& root, const std::string& threads) {
  const std::string p = root.string();
  run_ok({"--project", p, "init", "--sample"});
  for (const char* cmd : {"ingest", "segment", "embed", "cluster"}) run_ok({"--project", p, "--threads", threads, cmd});
  run_ok({"--project", p, "--threads", threads, "export"});
  run_ok({"--project", p, "--threads", threads, "similarity"});
}

}  // namespace

TEST(Cli, SampleProjectRunsEndToEnd) {
  testutil::TempDir tmp;
  const std::string p = tmp.path().string();
  run_ok({"--project", p, "init", "--sample"});
  const Outcome ingest = kanto_run({"--project", p, "--json", "ingest"});
  ASSERT_EQ(ingest.status, 0) << ingest.err;
  EXPECT_EQ(json::parse(ingest.out)["records"], 20);
  const Outcome seg = kanto_run({"--project", p, "--json", "segment"});
  ASSERT_EQ(seg.status, 0) << seg.err;
  EXPECT_GT(json::parse(seg.out)["units"].get<int>(), 20);
  run_ok({"--project", p, "embed"});
  const Outcome cl = kanto_run({"--project", p, "--json", "cluster"});
  ASSERT_EQ(cl.status, 0) << cl.err;
  EXPECT_EQ(json::parse(cl.out)["groups"].size(), 1u);
  const Outcome ex = kanto_run({"--project", p, "--json", "export", "--split", "0.8"});
  ASSERT_EQ(ex.status, 0) << ex.err;
  const json e = json::parse(ex.out);
  EXPECT_EQ(e["train"].get<int>() + e["test"].get<int>(), 20);
  const Outcome sim = kanto_run({"--project", p, "--json", "similarity"});
  ASSERT_EQ(sim.status, 0) << sim.err;
  EXPECT_TRUE(fs::exists(tmp.path() / "output" / "similarity" / "report.json"));
}

TEST(Cli, ExitCodes) {
  testutil::TempDir tmp;
  const std::string p = tmp.path().string();
  EXPECT_EQ(kanto_run({"--bogus"}).status, 1);
  EXPECT_EQ(kanto_run({"--project", p, "embed", "--method", "tsne"}).status, 1);
  run_ok({"--project", p, "init"});
  // stage errors are validation-class
  const Outcome early = kanto_run({"--project", p, "cluster"});
  EXPECT_EQ(early.status, 1);
  EXPECT_NE(early.err.find("kanto ingest"), std::string::npos);
  // unwritable project is an I/O-class failure
  EXPECT_EQ(kanto_run({"--project", "/sys/kanto-cannot-write", "init"}).status, 2);
  // malformed parameters
  testutil::write_text(tmp.path() / "bad.json", R"({"hop_length": 0})");
  EXPECT_EQ(kanto_run({"--project", p, "--params", (tmp.path() / "bad.json").string(), "ingest"}).status, 1);
  testutil::write_text(tmp.path() / "broken.json", "{");
  EXPECT_EQ(kanto_run({"--project", p, "--params", (tmp.path() / "broken.json").string(), "ingest"}).status, 1);
  EXPECT_EQ(kanto_run({"--project", p, "--params", (tmp.path() / "absent.json").string(), "ingest"}).status, 2);
}

TEST(Cli, ClusterBeforeEmbedIsStateError) {
  testutil::TempDir tmp;
  const std::string p = tmp.path().string();
  run_ok({"--project", p, "init", "--sample"});
  run_ok({"--project", p, "ingest"});
  run_ok({"--project", p, "segment"});
  const Outcome o = kanto_run({"--project", p, "--json", "cluster"});
  EXPECT_EQ(o.status, 1);
  const json j = json::parse(o.err);
  EXPECT_EQ(j["error"]["code"], "state");
  EXPECT_NE(j["error"]["message"].get<std::string>().find("kanto embed"), std::string::npos);
}

TEST(Cli, OutputsIdenticalAcrossRunsAndThreads) {
  testutil::TempDir a, b, c;
  full_pipeline(a.path(), "1");
  full_pipeline(b.path(), "1");
  full_pipeline(c.path(), "8");
  for (const char* sub : {"data", "output"}) {
    const auto ta = testutil::tree_contents(a.path() / sub);
    EXPECT_FALSE(ta.empty());
    EXPECT_EQ(ta, testutil::tree_contents(b.path() / sub)) << sub;
    EXPECT_EQ(ta, testutil::tree_contents(c.path() / sub)) << sub;
  }
}

TEST(Cli, BenchReportsRuns) {
  const Outcome o = kanto_run({"--json", "--threads", "1,2", "bench", "--units", "300"});
  ASSERT_EQ(o.status, 0) << o.err;
  const json j = json::parse(o.out);
  EXPECT_EQ(j["units"], 300);
  EXPECT_EQ(j["runs"].size(), 2u);
  EXPECT_EQ(j["identical_outputs"], true);
}
