#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "guifusion/cli.hpp"
#include "guifusion/service.hpp"
#include "support/store_fixture.hpp"

using namespace guifusion;
using guifusion::testing::fixture_path;
using guifusion::testing::fixed_clock;
using guifusion::testing::NoteStore;
using guifusion::testing::snapshot;
using guifusion::testing::TempDir;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "guifusion");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string model(const std::string& name) { return fixture_path(name).string(); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { ::unsetenv("GUIFUSION_DB"); }
  void TearDown() override { ::unsetenv("GUIFUSION_DB"); }
};

// A store with one finalized noteapp-v1 report.
std::string seed_report(const std::filesystem::path& root) {
  Store store(root);
  ReporterService service(store, fixed_clock);
  const auto id = service.create_session("noteapp", "1");
  StepInput step;
  step.component = "btn_new";
  service.submit_step(id, step);
  step.component = "btn_back";
  service.submit_step(id, step);
  return service.finalize(id, "Back discards", "emulator", "x");
}

}  // namespace

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"explode"}).code, 1);
  EXPECT_EQ(cli({"rip", model("noteapp-v1")}).code, 1);
  EXPECT_EQ(cli({"crashes", model("noteapp-v1"), "--strategy", "bogus"}).code, 1);
  EXPECT_EQ(cli({"crashes", model("noteapp-v1"), "--budget", "0"}).code, 1);
  EXPECT_EQ(cli({"dedup"}).code, 1);
  EXPECT_EQ(cli({"report", "render", "report-000001"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(CliTest, RipWritesDatabaseLayout) {
  TempDir dir;
  const auto r = cli({"rip", model("noteapp-v1"), "--out", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = Json::parse(r.out);
  EXPECT_EQ(summary["states"], 3);
  EXPECT_EQ(summary["edges"], 7);
  EXPECT_EQ(summary["truncated"], false);
  const auto db = dir.path() / "db" / "noteapp" / "1";
  for (const auto* f : {"model.json", "efg.json", "ngram.json", "trace.json"}) {
    EXPECT_TRUE(std::filesystem::exists(db / f)) << f;
  }
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(db / "states"), {}), 3);
  EXPECT_GT(std::distance(std::filesystem::directory_iterator(db / "screens"), {}), 3);
}

TEST_F(CliTest, RipIsByteDeterministic) {
  TempDir a, b;
  ASSERT_EQ(cli({"rip", model("gallery-v1"), "--out", a.path().string()}).code, 0);
  ASSERT_EQ(cli({"rip", model("gallery-v1"), "--out", b.path().string()}).code, 0);
  EXPECT_EQ(snapshot(a.path()), snapshot(b.path()));
}

TEST_F(CliTest, RipBudgetFlags) {
  TempDir dir;
  const auto r = cli({"rip", model("noteapp-v1"), "--out", dir.path().string(), "--max-events", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["edges"], 1);
  EXPECT_EQ(Json::parse(r.out)["truncated"], true);
}

TEST_F(CliTest, DataErrorsExitTwo) {
  TempDir dir;
  write_file(dir.path() / "bad.json", "{\"app_id\": ");
  const auto r = cli({"rip", (dir.path() / "bad.json").string(), "--out", dir.path().string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("SyntaxError"), std::string::npos);
  EXPECT_EQ(cli({"rip", (dir.path() / "missing.json").string(), "--out", dir.path().string()}).code, 2);
  EXPECT_EQ(cli({"report", "render", "report-000001", "--db", dir.path().string()}).code, 2);
}

TEST_F(CliTest, RenderUsesDbFlagOrEnvironment) {
  NoteStore files;
  const auto id = seed_report(files.root());
  Store store(files.root());
  const auto md = cli({"report", "render", id, "--db", files.root().string()});
  ASSERT_EQ(md.code, 0) << md.err;
  EXPECT_EQ(md.out, store.report_document(id, ReportFormat::Markdown));

  ::setenv("GUIFUSION_DB", files.root().string().c_str(), 1);
  const auto html = cli({"report", "render", id, "--format", "html"});
  ASSERT_EQ(html.code, 0) << html.err;
  EXPECT_EQ(html.out, store.report_document(id, ReportFormat::Html));
  // The environment wins over the flag.
  EXPECT_EQ(cli({"report", "render", id, "--db", "/nonexistent"}).code, 0);
}

TEST_F(CliTest, ReplayAcceptsFileOrId) {
  NoteStore files;
  const auto id = seed_report(files.root());
  const auto report_file = files.root() / "reports" / (id + ".json");
  const auto v1 = cli({"replay", report_file.string(), model("noteapp-v1")});
  ASSERT_EQ(v1.code, 0) << v1.err;
  EXPECT_EQ(Json::parse(v1.out)["outcome"], "reproduced");
  const auto v2 = cli({"replay", id, model("noteapp-v2"), "--db", files.root().string()});
  ASSERT_EQ(v2.code, 0) << v2.err;
  EXPECT_EQ(Json::parse(v2.out)["steps"][1]["match_level"], "kind+label");
  const auto broken = cli({"replay", report_file.string(), model("noteapp-v2-broken")});
  EXPECT_EQ(Json::parse(broken.out)["outcome"], "diverged");
  EXPECT_EQ(Json::parse(broken.out)["divergence_ordinal"], 2);
}

TEST_F(CliTest, CrashesStrategies) {
  const auto dfs = cli({"crashes", model("noteapp-v1"), "--strategy", "dfs"});
  ASSERT_EQ(dfs.code, 0) << dfs.err;
  const auto list = Json::parse(dfs.out);
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0]["title"], "Crash: NullPointerException in ListActivity");
  EXPECT_EQ(list[0]["steps"].size(), 2u);

  EXPECT_EQ(Json::parse(cli({"crashes", model("noteapp-v1"), "--strategy", "random", "--seed", "7", "--budget", "1"}).out),
            Json::array());
  for (const auto* strategy : {"random", "ngram"}) {
    const auto a = cli({"crashes", model("gallery-v1"), "--strategy", strategy, "--seed", "3", "--budget", "300"});
    const auto b = cli({"crashes", model("gallery-v1"), "--strategy", strategy, "--seed", "3", "--budget", "300"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
  }
}

TEST_F(CliTest, CrashesPersistIntoStore) {
  NoteStore files;
  const auto r = cli({"crashes", model("noteapp-v1"), "--db", files.root().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)[0]["report_id"], "report-000001");
  Store store(files.root());
  EXPECT_EQ(store.load_report("report-000001").crash, std::optional<std::string>("NullPointerException"));
}

TEST_F(CliTest, DedupWritesResult) {
  NoteStore files;
  seed_report(files.root());
  seed_report(files.root());
  const auto r = cli({"dedup", "--db", files.root().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto result = Json::parse(r.out);
  ASSERT_EQ(result["pairs"].size(), 1u);
  EXPECT_EQ(result["pairs"][0]["score"], 1.0);
  EXPECT_EQ(read_file(files.root() / "duplicates.json"), r.out);
  EXPECT_EQ(cli({"dedup", "--db", files.root().string(), "--tau", "1.5"}).code, 1);
}

TEST_F(CliTest, TriageRanksOwners) {
  NoteStore files;
  const auto id = seed_report(files.root());
  const auto owners = files.root() / "owners.json";
  write_file(owners, R"({"bob": {"ListActivity": 3}, "alice": {"EditorActivity": 5, "MainActivity": 1}})");
  const auto r = cli({"triage", id, "--owners", owners.string(), "--db", files.root().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out), Json::parse(R"([{"developer": "alice", "score": 6}, {"developer": "bob", "score": 0}])"));
  write_file(owners, "{}");
  EXPECT_EQ(cli({"triage", id, "--owners", owners.string(), "--db", files.root().string()}).code, 2);
}
