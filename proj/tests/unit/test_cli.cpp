#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "ctgn/diff/checkpoint.hpp"
#include "ctgn/graph/event_store.hpp"
#include "ctgn/train/trainer.hpp"
#include "json.hpp"
#include "test_util.hpp"

using namespace ctgn;
using ctgn::testing::ScratchDir;
using ctgn::testing::slurp;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ctgn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json small_config(const std::string& data = "") {
  json c = {{"batch_size", 50}, {"dim", 8},        {"time_dim", 4}, {"ode_hidden", 8},
            {"neighbors", 3},   {"epochs", 2},      {"lr", 3e-3},    {"solver", {{"steps", 2}}}};
  if (data.empty())
    c["synthetic"] = {{"seed", 2}, {"users", 60}, {"items", 20}, {"events", 1200}};
  else
    c["data"] = data;
  return c;
}

std::string write_config(const ScratchDir& dir, const json& c, const std::string& name = "cfg.json") {
  return dir.write(name, c.dump(2)).string();
}

std::vector<json> read_log(const std::filesystem::path& p, bool drop_seconds) {
  std::vector<json> rows;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) {
    json j = json::parse(line);
    if (drop_seconds) j.erase("seconds");
    rows.push_back(j);
  }
  return rows;
}

}  // namespace

TEST(Cli, UnknownKeyIsUserErrorNamingKey) {
  ScratchDir dir("cli");
  json c = small_config();
  c["learning_rate"] = 0.1;
  const auto r = run_cli({"train", "--config", write_config(dir, c)});
  EXPECT_EQ(r.code, cli::kUserError);
  EXPECT_NE(r.err.find("learning_rate"), std::string::npos) << r.err;
}

TEST(Cli, MissingDatasetNamesKey) {
  ScratchDir dir("cli");
  json c = small_config();
  c.erase("synthetic");
  const auto r = run_cli({"train", "--config", write_config(dir, c)});
  EXPECT_EQ(r.code, cli::kUserError);
  EXPECT_NE(r.err.find("'data'"), std::string::npos) << r.err;
}

TEST(Cli, BadArgumentsAreUserErrors) {
  EXPECT_EQ(run_cli({}).code, cli::kUserError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kUserError);
  EXPECT_EQ(run_cli({"train"}).code, cli::kUserError);
  EXPECT_EQ(run_cli({"train", "--config", "/nonexistent/cfg.json"}).code, cli::kUserError);
}

TEST(Cli, SynthRowCountBytesAndReingest) {
  ScratchDir dir("synth");
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  const std::vector<std::string> common{"--seed", "5", "--users", "30", "--items", "12",
                                        "--events", "777", "--noise", "0.2"};
  auto args = common;
  args.insert(args.begin(), "synth");
  args.insert(args.end(), {"--out", a});
  ASSERT_EQ(run_cli(args).code, 0);
  args.back() = b;
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));

  std::ifstream in(a);
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) lines += !l.empty();
  EXPECT_EQ(lines, 777u + 1);

  const EventStore s = parse_events(a);
  const EventStore direct = generate_synthetic(SyntheticConfig{.seed = 5, .n_users = 30, .n_items = 12,
                                                               .n_events = 777, .noise = 0.2}).store;
  ASSERT_EQ(s.size(), direct.size());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i], direct[i]);
}

TEST(Cli, GradcheckExitCodes) {
  EXPECT_EQ(run_cli({"gradcheck", "--module", "time_codec", "--module", "decoders"}).code, 0);
  const auto broken = run_cli({"gradcheck", "--module", "broken_fixture"});
  EXPECT_EQ(broken.code, cli::kNumericFailure);
  EXPECT_NE(broken.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(run_cli({"gradcheck", "--module", "nope"}).code, cli::kUserError);
  EXPECT_EQ(run_cli({"gradcheck"}).code, cli::kUserError);
}

TEST(Cli, TrainWritesArtifactsAndSeedsReproduce) {
  ScratchDir dir("train");
  const auto cfg = write_config(dir, small_config());
  const auto o1 = (dir / "run1").string(), o2 = (dir / "run2").string();
  ASSERT_EQ(run_cli({"train", "--config", cfg, "--seed", "7", "--output", o1}).code, 0);
  ASSERT_EQ(run_cli({"train", "--config", cfg, "--seed", "7", "--output", o2}).code, 0);
  for (const char* f : {"resolved_config.json", "split_manifest.txt", "train_log.jsonl",
                        "checkpoint.bin", "eval_report.json"})
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(o1) / f)) << f;
  const auto log1 = read_log(std::filesystem::path(o1) / "train_log.jsonl", true);
  EXPECT_EQ(log1.size(), 2u);
  EXPECT_EQ(log1, read_log(std::filesystem::path(o2) / "train_log.jsonl", true));
  EXPECT_TRUE(read_log(std::filesystem::path(o1) / "train_log.jsonl", false)[0].contains("seconds"));
  const json rc = json::parse(slurp(std::filesystem::path(o1) / "resolved_config.json"));
  EXPECT_EQ(rc["seed"], 7);
  EXPECT_EQ(rc["alpha"], 0.7);
  EXPECT_EQ(rc["has_duration"], true);

  // The resolved snapshot reproduces the run.
  const auto o3 = (dir / "run3").string();
  ASSERT_EQ(run_cli({"train", "--config", (std::filesystem::path(o1) / "resolved_config.json").string(),
                     "--output", o3}).code, 0);
  EXPECT_EQ(log1, read_log(std::filesystem::path(o3) / "train_log.jsonl", true));
  const Checkpoint k1 = read_checkpoint(std::filesystem::path(o1) / "checkpoint.bin");
  const Checkpoint k3 = read_checkpoint(std::filesystem::path(o3) / "checkpoint.bin");
  EXPECT_EQ(k1.tensors, k3.tensors);
  EXPECT_EQ(k1.step, k3.step);
}

TEST(Cli, EnvironmentOverridesOutputDirectory) {
  ScratchDir dir("env");
  json c = small_config();
  c["epochs"] = 1;
  const auto cfg = write_config(dir, c);
  const auto env_dir = (dir / "from_env").string();
  setenv("CTGN_OUTPUT_DIR", env_dir.c_str(), 1);
  const auto r = run_cli({"train", "--config", cfg, "--output", (dir / "flag").string()});
  unsetenv("CTGN_OUTPUT_DIR");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(env_dir) / "checkpoint.bin"));
  EXPECT_FALSE(std::filesystem::exists(dir / "flag"));
}

TEST(Cli, MultipleRunsWriteSummary) {
  ScratchDir dir("runs");
  json c = small_config();
  c["epochs"] = 1;
  const auto out = (dir / "o").string();
  ASSERT_EQ(run_cli({"train", "--config", write_config(dir, c), "--runs", "2", "--output", out}).code, 0);
  const json s = json::parse(slurp(std::filesystem::path(out) / "summary.json"));
  ASSERT_TRUE(s.contains("test_transductive"));
  EXPECT_EQ(s["test_transductive"]["ap"]["values"].size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(out) / "run_1" / "checkpoint.bin"));
}

TEST(Cli, EvalReportRoundTripsAndInductiveNeedsUnseen) {
  ScratchDir dir("eval");
  json c = small_config();
  c["epochs"] = 1;
  const auto cfg = write_config(dir, c);
  const auto out = (dir / "o").string();
  ASSERT_EQ(run_cli({"train", "--config", cfg, "--output", out}).code, 0);
  const auto ckpt = (std::filesystem::path(out) / "checkpoint.bin").string();
  const auto eval_dir = (dir / "e").string();
  const auto r = run_cli({"eval", "--config", cfg, "--checkpoint", ckpt, "--mode", "inductive",
                          "--split", "val", "--output", eval_dir});
  ASSERT_EQ(r.code, 0) << r.err;
  const json printed = json::parse(r.out);
  const json file = json::parse(slurp(std::filesystem::path(eval_dir) / "eval_report.json"));
  EXPECT_EQ(printed, file);
  EXPECT_EQ(file["mode"], "inductive");
  EXPECT_EQ(file["split"], "val");
  EXPECT_GT(file["events"].get<int>(), 0);

  json none = c;
  none["split"] = {{"unseen_fraction", 0.0}};
  const auto cfg0 = write_config(dir, none, "none.json");
  const auto out0 = (dir / "o0").string();
  ASSERT_EQ(run_cli({"train", "--config", cfg0, "--output", out0}).code, 0);
  const auto bad = run_cli({"eval", "--config", cfg0, "--checkpoint",
                            (std::filesystem::path(out0) / "checkpoint.bin").string(), "--mode", "inductive"});
  EXPECT_EQ(bad.code, cli::kUserError);
  EXPECT_NE(bad.err.find("inductive"), std::string::npos);
  EXPECT_EQ(run_cli({"eval", "--config", cfg, "--checkpoint", ckpt, "--mode", "sideways"}).code, cli::kUserError);
}

TEST(Cli, UntrainedCheckpointScoresNearChance) {
  ScratchDir dir("null");
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> user(0, 99), item(0, 49);
  std::ostringstream csv;
  csv << "u,i,ts,label,f0\n";
  for (int e = 0; e < 20000; ++e) csv << user(rng) << ',' << item(rng) << ',' << e << ",0,1\n";
  const auto data = dir.write("uniform.csv", csv.str()).string();
  const auto cfg = write_config(dir, small_config(data));
  const TrainConfig tc = load_config(cfg);
  const Experiment ex = prepare_experiment(tc, load_dataset(tc));
  const Model model(tc, ex.shape(), ex.stats);
  TrainResult untrained;
  untrained.params = model.init_params(tc.seed);
  untrained.memory = model.fresh_memory();
  const auto ckpt = (dir / "untrained.bin").string();
  write_checkpoint(ckpt, untrained.checkpoint(ex));
  const auto r = run_cli({"eval", "--config", cfg, "--checkpoint", ckpt, "--output", (dir / "e").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(r.out);
  EXPECT_GE(rep["events"].get<int>(), 2000);
  EXPECT_NEAR(rep["ap"].get<double>(), 0.5, 0.1);
}
