#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vaxnet/pipeline.hpp"

using namespace vaxnet;
using namespace vaxnet::pipeline;
using vaxnet::test::TempDir;

namespace {

nlohmann::json fixture_config(const fs::path& work) {
  return {{"input", vaxnet::test::data_path("fixture_small.jsonl").string()},
          {"work_dir", work.string()},
          {"seed", 7},
          {"scatter", {{"min_count", 1}, {"formats", {"tsv", "json", "svg"}}}},
          {"features", {{"min_df", 1}, {"max_len", 32}}}};
}

std::size_t ran(const RunResult& r) {
  std::size_t n = 0;
  for (const auto& s : r.stages) n += s.skipped ? 0 : 1;
  return n;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VAXNET_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Pipeline, FixtureEndToEnd) {
  TempDir dir("pipe");
  const auto cfg = parse_pipeline_config(fixture_config(dir.path()), dir.path());
  const auto r = run_pipeline(cfg);
  EXPECT_EQ(ran(r), r.stages.size());
  EXPECT_EQ(r.stages.front().name, "ingest");
  EXPECT_EQ(r.stages.back().name, "score");

  const auto report = eval::report_from_json(nlohmann::json::parse(io::read_file(dir / "report.json")));
  ASSERT_EQ(report.rows.size(), 8u);
  for (const auto& row : report.rows) {
    EXPECT_GE(row.auc, 0.0);
    EXPECT_LE(row.auc, 1.0);
  }
  // Suggestion picks the block carrying the marker hashtags.
  std::ifstream lin(dir / "labels.tsv");
  const auto labels = community::read_labels(lin);
  EXPECT_EQ(labels.at("A"), community::Label::antivaxx);
  EXPECT_EQ(labels.at("D"), community::Label::other);

  const auto scores = io::read_file(dir / "scores.tsv");
  EXPECT_EQ(std::count(scores.begin(), scores.end(), '\n'), 8);  // header + 7 authors
  const auto manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest["status"], "ok");
  EXPECT_EQ(manifest["defaults_hash"], defaults_hash());
  EXPECT_EQ(manifest["config"]["training"]["dnn-bow"]["learning_rate"], 0.05);
}

TEST(Pipeline, RerunSkipsAndDeletedOutputReruns) {
  TempDir dir("pipe");
  auto j = fixture_config(dir.path());
  j["models"] = {"nb", "logreg"};
  j["score_model"] = "nb";
  const auto cfg = parse_pipeline_config(j, dir.path());
  run_pipeline(cfg);
  const auto again = run_pipeline(cfg);
  EXPECT_EQ(ran(again), 0u);

  fs::remove(dir / "scores.tsv");
  const auto third = run_pipeline(cfg);
  ASSERT_EQ(ran(third), 1u);
  EXPECT_FALSE(third.stages.back().skipped);

  RunOptions force;
  force.force = true;
  EXPECT_EQ(ran(run_pipeline(cfg, force)), third.stages.size());
}

TEST(Pipeline, ChangedParameterRerunsDownstream) {
  TempDir dir("pipe");
  auto j = fixture_config(dir.path());
  j["models"] = {"nb"};
  j["score_model"] = "nb";
  run_pipeline(parse_pipeline_config(j, dir.path()));
  j["scatter"]["min_count"] = 2;
  const auto r = run_pipeline(parse_pipeline_config(j, dir.path()));
  for (const auto& s : r.stages) EXPECT_EQ(s.skipped, s.name != "scatter") << s.name;
}

TEST(Pipeline, CorruptedIntermediateAbortsNamingStage) {
  TempDir dir("pipe");
  auto j = fixture_config(dir.path());
  j["models"] = {"nb"};
  j["score_model"] = "nb";
  const auto cfg = parse_pipeline_config(j, dir.path());
  run_pipeline(cfg);
  {
    std::ofstream out(dir / "edges.tsv", std::ios::app);
    out << "zz\tyy\t1\n";
  }
  try {
    run_pipeline(cfg);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "network");
    EXPECT_NE(std::string(e.what()).find("network"), std::string::npos);
  }
}

TEST(Pipeline, FailedStageRecordedInManifest) {
  TempDir dir("pipe");
  auto j = fixture_config(dir.path());
  j["models"] = {"nb"};
  j["score_model"] = "nb";
  j["community"] = {{"antivaxx_id", 9}};
  EXPECT_THROW(run_pipeline(parse_pipeline_config(j, dir.path())), StageError);
  const auto manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest["status"], "failed");
  EXPECT_EQ(manifest["stages"].back()["name"], "label");
}

TEST(PipelineConfig, Errors) {
  TempDir dir("cfg");
  auto j = fixture_config(dir.path());
  j["bogus"] = 1;
  EXPECT_THROW(parse_pipeline_config(j, dir.path()), ConfigError);
  j = fixture_config(dir.path());
  j["features"]["train_fraction"] = 1.5;
  EXPECT_THROW(parse_pipeline_config(j, dir.path()), ConfigError);
  j = fixture_config(dir.path());
  j["models"] = {"nb"};
  EXPECT_THROW(parse_pipeline_config(j, dir.path()), ConfigError);
  j = fixture_config(dir.path());
  j["training"] = {{"lstm", {{"epochs", 0}}}};
  EXPECT_THROW(parse_pipeline_config(j, dir.path()), ConfigError);
  j = fixture_config(dir.path());
  j["input"] = (dir / "missing.jsonl").string();
  EXPECT_THROW(run_pipeline(parse_pipeline_config(j, dir.path())), ConfigError);
  EXPECT_THROW(load_pipeline_config(dir / "nope.json"), ConfigError);
}

TEST(PipelineConfig, RelativePathsResolveAgainstConfigFile) {
  TempDir dir("cfg");
  io::write_file(dir / "run.json", R"({"input": "in.jsonl", "work_dir": "out"})");
  const auto cfg = load_pipeline_config(dir / "run.json");
  EXPECT_EQ(cfg.input, (dir / "in.jsonl").lexically_normal());
  EXPECT_EQ(cfg.work_dir, (dir / "out").lexically_normal());
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli");
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("--no-such-flag"), 2);
  EXPECT_EQ(run_cli("ingest --input " + (dir / "missing.jsonl").string() + " --out " + (dir / "x").string()), 1);
  EXPECT_EQ(run_cli("pipeline --config " + (dir / "missing.json").string()), 2);
  io::write_file(dir / "bad.json", R"({"input": "x", "work_dir": "w", "oops": 1})");
  EXPECT_EQ(run_cli("pipeline --config " + (dir / "bad.json").string()), 2);
}

TEST(Cli, StagesChainOnFixture) {
  TempDir dir("cli");
  const auto in = vaxnet::test::data_path("fixture_small.jsonl").string();
  const auto p = [&](const char* name) { return (dir / name).string(); };
  ASSERT_EQ(run_cli("ingest --input " + in + " --out " + p("posts.jsonl")), 0);
  ASSERT_EQ(run_cli("network --input " + p("posts.jsonl") + " --out " + p("e.tsv") + " --prune-wcc"), 0);
  ASSERT_EQ(run_cli("communities --edges " + p("e.tsv") + " --seed 1 --out " + p("part.tsv")), 0);
  ASSERT_EQ(run_cli("label --partition " + p("part.tsv") + " --antivaxx-id 0 --out " + p("labels.tsv")), 0);
  ASSERT_EQ(run_cli("corpus --input " + p("posts.jsonl") + " --out " + p("corpus.jsonl")), 0);
  ASSERT_EQ(run_cli("scatter --corpus " + p("corpus.jsonl") + " --labels " + p("labels.tsv") + " --min-count 1 --out " +
                    p("s.tsv")),
            0);
  EXPECT_NE(io::read_file(dir / "s.tsv").find("vaccine"), std::string::npos);
  std::ifstream pin(dir / "part.tsv");
  EXPECT_EQ(community::read_partition(pin).community_count, 2);
}
