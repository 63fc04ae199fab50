#include "commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "ctgn/errors.hpp"
#include "ctgn/graph/synthetic.hpp"
#include "ctgn/train/gradcheck_suite.hpp"
#include "ctgn/train/node_class.hpp"
#include "ctgn/train/trainer.hpp"

namespace ctgn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path output_dir(const TrainConfig& config, const std::string& flag) {
  if (const char* env = std::getenv("CTGN_OUTPUT_DIR"); env && *env) return env;
  if (!flag.empty()) return flag;
  return config.output_dir;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json report_json(const EvalReport& r) {
  return {{"split", r.split}, {"mode", r.mode}, {"events", r.events}, {"ap", r.ap}, {"auc", r.auc}};
}

json epoch_json(const EpochLog& l) {
  return {{"epoch", l.epoch},   {"train_loss", l.train_loss}, {"train_task", l.train_task},
          {"train_smooth", l.train_smooth}, {"val_ap", l.val_ap}, {"val_auc", l.val_auc},
          {"seconds", l.seconds}};
}

// The snapshot written next to a run: defaults resolved against the data.
TrainConfig resolve(TrainConfig c, const EventStore& store) {
  c.has_duration = store.has_duration();
  c.lr = c.resolved_lr(store.has_duration());
  c.alpha = c.resolved_alpha(store.has_duration());
  return c;
}

struct RunOutcome {
  std::vector<EvalReport> reports;
  std::optional<NodeClassResult> node;
};

RunOutcome train_one(const TrainConfig& config, const EventStore& store, const fs::path& dir,
                     std::ostream& out) {
  fs::create_directories(dir);
  const Experiment ex = prepare_experiment(config, store);
  write_json(dir / "resolved_config.json", config_to_json(config));
  write_split_manifest(dir / "split_manifest.txt", ex.split, ex.mask);
  std::ofstream log(dir / "train_log.jsonl");
  const TrainResult result = train(ex, [&](const EpochLog& l) {
    log << epoch_json(l).dump() << '\n';
    log.flush();
    out << "epoch " << l.epoch << "  loss " << std::fixed << std::setprecision(4) << l.train_loss
        << "  val_ap " << l.val_ap << "  " << std::setprecision(1) << l.seconds << "s\n"
        << std::defaultfloat;
  });
  write_checkpoint(dir / "checkpoint.bin", result.checkpoint(ex));

  RunOutcome outcome;
  outcome.reports.push_back(
      evaluate(ex, result.params, result.memory, SplitName::kTest, EvalMode::kTransductive));
  if (!ex.mask.unseen.empty())
    outcome.reports.push_back(
        evaluate(ex, result.params, result.memory, SplitName::kTest, EvalMode::kInductive));
  json doc = {{"best_epoch", result.best_epoch}, {"best_val_ap", result.best_val_ap}};
  for (const auto& r : outcome.reports) doc["reports"].push_back(report_json(r));
  if (config.node_classification) {
    outcome.node = train_node_classifier(ex, source_embeddings(ex, result.params));
    doc["node_classification"] = {{"best_epoch", outcome.node->best_epoch},
                                  {"val_auc", outcome.node->best_val_auc},
                                  {"test_auc", outcome.node->test_auc}};
  }
  write_json(dir / "eval_report.json", doc);
  return outcome;
}

json mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
  return {{"mean", mean}, {"std", sd}, {"values", v}};
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed, std::size_t runs,
              const std::string& out_flag, std::ostream& out) {
  TrainConfig config = load_config(config_path);
  if (seed) config.seed = *seed;
  const fs::path dir = output_dir(config, out_flag);
  const EventStore store = load_dataset(config);
  config = resolve(config, store);
  config.output_dir = dir.string();
  std::vector<RunOutcome> outcomes;
  for (std::size_t r = 0; r < runs; ++r) {
    TrainConfig rc = config;
    rc.seed = config.seed + r;
    const fs::path run_dir = runs == 1 ? dir : dir / ("run_" + std::to_string(r));
    if (runs > 1) out << "run " << r + 1 << "/" << runs << " (seed " << rc.seed << ")\n";
    outcomes.push_back(train_one(rc, store, run_dir, out));
  }
  json summary;
  for (std::size_t k = 0; k < outcomes.front().reports.size(); ++k) {
    std::vector<double> ap, auc;
    for (const auto& o : outcomes) {
      ap.push_back(o.reports[k].ap);
      auc.push_back(o.reports[k].auc);
    }
    const auto& r = outcomes.front().reports[k];
    summary[r.split + "_" + r.mode] = {{"ap", mean_std(ap)}, {"auc", mean_std(auc)}};
    const json m = mean_std(ap);
    out << r.split << " " << r.mode << " AP " << std::fixed << std::setprecision(4)
        << m["mean"].get<double>() << " +- " << m["std"].get<double>() << std::defaultfloat << '\n';
  }
  if (config.node_classification) {
    std::vector<double> auc;
    for (const auto& o : outcomes) auc.push_back(o.node->test_auc);
    summary["node_classification_test_auc"] = mean_std(auc);
  }
  if (runs > 1) write_json(dir / "summary.json", summary);
  return kOk;
}

int cmd_eval(const std::string& config_path, const std::string& ckpt_path,
             const std::string& mode, const std::string& split, const std::string& out_flag,
             std::ostream& out) {
  const TrainConfig config = load_config(config_path);
  const SplitName s = parse_split(split);
  const EvalMode m = parse_mode(mode);
  const Experiment ex = prepare_experiment(config, load_dataset(config));
  const Restored state = restore(ex, read_checkpoint(ckpt_path));
  const EvalReport report = evaluate(ex, state.params, state.memory, s, m);
  const json doc = report_json(report);
  out << doc.dump(2) << '\n';
  const fs::path dir = output_dir(config, out_flag);
  fs::create_directories(dir);
  write_json(dir / "eval_report.json", doc);
  return kOk;
}

int cmd_gradcheck(const std::vector<std::string>& modules, double tolerance, std::ostream& out) {
  GradCheckOptions options;
  options.tolerance = tolerance;
  bool all = true;
  out << std::left << std::setw(22) << "module" << std::setw(8) << "result"
      << "max_rel_error\n";
  for (const auto& m : run_gradchecks(modules, options)) {
    out << std::setw(22) << m.module << std::setw(8) << (m.report.passed ? "PASS" : "FAIL")
        << std::scientific << std::setprecision(2) << m.report.max_rel_error << std::defaultfloat
        << '\n';
    for (const auto& p : m.report.params)
      if (!p.passed) out << "    " << p.name << "  " << p.max_rel_error << '\n';
    all = all && m.report.passed;
  }
  return all ? kOk : kNumericFailure;
}

int cmd_synth(const SyntheticConfig& config, const std::string& path, std::ostream& out) {
  const SyntheticData data = generate_synthetic(config);
  write_events(path, data.store);
  out << "wrote " << data.store.size() << " events to " << path << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Continuous temporal graph networks: training, evaluation and tooling"};
  app.require_subcommand(1);

  std::string config_path, out_flag, ckpt_path, mode = "transductive", split = "test",
                                                synth_out;
  std::optional<std::uint64_t> seed;
  std::size_t runs = 1;
  std::vector<std::string> modules;
  double tolerance = 1e-4;
  SyntheticConfig synth;

  auto* train = app.add_subcommand("train", "train a link predictor from a config file");
  train->add_option("--config", config_path, "JSON config")->required();
  train->add_option("--seed", seed, "override the root seed");
  train->add_option("--runs", runs, "independent runs with seeds seed, seed+1, ...")
      ->check(CLI::PositiveNumber);
  train->add_option("--output", out_flag, "output directory");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--config", config_path, "JSON config")->required();
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval->add_option("--mode", mode, "transductive or inductive");
  eval->add_option("--split", split, "val or test");
  eval->add_option("--output", out_flag, "output directory");

  auto* grad = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  grad->add_option("--module", modules, "all, a module name, or broken_fixture")->required();
  grad->add_option("--tolerance", tolerance, "max relative error");

  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic duration-sensitive dataset");
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--users", synth.n_users);
  synth_cmd->add_option("--items", synth.n_items);
  synth_cmd->add_option("--events", synth.n_events);
  synth_cmd->add_option("--noise", synth.noise);
  synth_cmd->add_option("--clusters", synth.n_clusters);
  synth_cmd->add_option("--out", synth_out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUserError;
  }

  try {
    if (*train) return cmd_train(config_path, seed, runs, out_flag, out);
    if (*eval) return cmd_eval(config_path, ckpt_path, mode, split, out_flag, out);
    if (*grad) return cmd_gradcheck(modules, tolerance, out);
    if (*synth_cmd) return cmd_synth(synth, synth_out, out);
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  }
  return kUserError;
}

}  // namespace ctgn::cli
