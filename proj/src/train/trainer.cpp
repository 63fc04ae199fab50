#include "ctgn/train/trainer.hpp"

#include <chrono>
#include <cmath>

#include "ctgn/errors.hpp"
#include "ctgn/graph/neighbors.hpp"
#include "ctgn/seed.hpp"
#include "ctgn/train/metrics.hpp"

namespace ctgn {


SplitName parse_split(const std::string& name) {
  if (name == "train") return SplitName::kTrain;
  if (name == "val") return SplitName::kVal;
  if (name == "test") return SplitName::kTest;
  throw DataError("unknown split '" + name + "' (expected train, val or test)");
}

EvalMode parse_mode(const std::string& name) {
  if (name == "transductive") return EvalMode::kTransductive;
  if (name == "inductive") return EvalMode::kInductive;
  throw DataError("unknown mode '" + name + "' (expected transductive or inductive)");
}

std::string to_string(SplitName split) {
  switch (split) {
    case SplitName::kTrain: return "train";
    case SplitName::kVal: return "val";
    case SplitName::kTest: return "test";
  }
  return "?";
}

std::string to_string(EvalMode mode) {
  return mode == EvalMode::kTransductive ? "transductive" : "inductive";
}

EventStore load_dataset(const TrainConfig& config) {
  if (!config.data.empty()) {
    CsvFormat fmt;
    fmt.has_duration = config.has_duration;
    fmt.bipartite = config.bipartite;
    fmt.max_events = config.max_events;
    return parse_events(config.data, fmt);
  }
  if (!config.synthetic) throw DataError("config key 'data': missing dataset path (or a 'synthetic' block)");
  EventStore store = generate_synthetic(*config.synthetic).store;
  if (config.max_events && config.max_events < store.size()) store = store.slice(0, config.max_events);
  return store;
}

Experiment prepare_experiment(const TrainConfig& config, EventStore store) {
  config.validate();
  Experiment ex;
  ex.config = config;
  ex.split = chronological_split(store, config.split);
  ex.mask = mask_unseen_nodes(store, ex.split, config.split.unseen_fraction,
                              derive_seed(config.seed, SeedStream::kMasking));
  ex.val = store.slice(ex.split.train_end, ex.split.val_end);
  ex.test = store.slice(ex.split.val_end, ex.split.total);
  ex.stats = duration_stats(ex.mask.train, config.t_max);
  ex.store = std::move(store);
  return ex;
}

bool EarlyStopping::observe(double score) {
  ++epochs_;
  if (best_epoch_ == 0 || score > best_) {
    best_ = score;
    best_epoch_ = epochs_;
    bad_epochs_ = 0;
    return false;
  }
  return ++bad_epochs_ >= patience_;
}

std::uint64_t negative_seed(std::uint64_t root, SplitName split, std::size_t epoch,
                            std::size_t batch) {
  const std::uint64_t tag = split == SplitName::kTrain ? epoch : (1ULL << 20) + static_cast<int>(split);
  return derive_seed(root, SeedStream::kNegatives, (tag << 32) | batch);
}

namespace {

std::vector<double> sigmoid_values(Var logits) {
  std::vector<double> out;
  out.reserve(logits.rows());
  for (double x : logits.value().data()) out.push_back(1.0 / (1.0 + std::exp(-x)));
  return out;
}

}  // namespace

BatchScores replay(const Model& model, const ParamSet& params, MemoryState& memory,
                   const EventStore& history, std::span<const Event> events,
                   std::span<const NodeId> candidates, std::uint64_t root_seed, SplitName split,
                   std::size_t epoch, bool allow_unknown, const ReplayHook& hook) {
  BatchScores scores;
  const std::size_t bs = model.config().batch_size;
  for (std::size_t b = 0, begin = 0; begin < events.size(); ++b, begin += bs) {
    const auto batch = events.subspan(begin, std::min(bs, events.size() - begin));
    const auto negs = sample_negatives(batch, candidates, negative_seed(root_seed, split, epoch, b));
    Tape tape;
    ParamVars p(tape, params, false);
    BatchForward out;
    try {
      out = model.forward(p, memory, history, batch, negs, allow_unknown);
    } catch (const NumericError& e) {
      throw NumericError("batch " + std::to_string(b) + ": " + e.what());
    }
    const auto pos = sigmoid_values(out.pos_logits);
    const auto neg = sigmoid_values(out.neg_logits);
    scores.pos.insert(scores.pos.end(), pos.begin(), pos.end());
    scores.neg.insert(scores.neg.end(), neg.begin(), neg.end());
    if (hook) hook(b, batch, out);
    model.memory_module().finish_batch(memory, out.update, batch);
  }
  return scores;
}

EpochLog train_epoch(const Model& model, ParamSet& params, OptimState& opt, const AdamConfig& adam,
                     MemoryState& memory, const Experiment& ex, std::size_t epoch,
                     std::vector<BatchScores>* scores) {
  EpochLog log;
  log.epoch = epoch + 1;
  memory.reset();
  const std::vector<NodeId> candidates = ex.mask.train.destinations();
  const auto batches = iterate_batches(ex.mask.train, model.config().batch_size);
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const auto batch = batches[b];
    const auto negs = sample_negatives(
        batch, candidates, negative_seed(ex.config.seed, SplitName::kTrain, epoch, b));
    Tape tape;
    ParamVars p(tape, params, true);
    try {
      BatchForward out = model.forward(p, memory, ex.mask.train, batch, negs);
      Var loss = model.loss(p, out, batch);
      tape.backward(loss);
      adam_step(params, p.grads(), opt, adam);
      log.train_loss += loss.value().item();
      log.train_smooth += out.smoothness.value().item();
      if (scores) scores->push_back({sigmoid_values(out.pos_logits), sigmoid_values(out.neg_logits)});
      model.memory_module().finish_batch(memory, out.update, batch);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(b) +
                         ": " + e.what());
    }
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, batches.size()));
  log.train_loss /= n;
  log.train_smooth /= n;
  log.train_task = log.train_loss - model.alpha() * log.train_smooth;
  return log;
}

namespace {

bool in_mode(const Experiment& ex, const Event& e, EvalMode mode) {
  const bool ind = ex.mask.is_unseen(e.src) || ex.mask.is_unseen(e.dst);
  return mode == EvalMode::kInductive ? ind : !ind;
}

EvalReport score_report(const Experiment& ex, std::span<const Event> events,
                        const BatchScores& s, SplitName split, EvalMode mode) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!in_mode(ex, events[i], mode)) continue;
    scores.push_back(s.pos[i]);
    labels.push_back(1);
    scores.push_back(s.neg[i]);
    labels.push_back(0);
  }
  if (scores.empty())
    throw DataError("no " + to_string(mode) + " events in the " + to_string(split) + " split");
  EvalReport r;
  r.split = to_string(split);
  r.mode = to_string(mode);
  r.events = scores.size() / 2;
  r.ap = average_precision(scores, labels);
  r.auc = roc_auc(scores, labels);
  return r;
}

ParamSet copy_params(const ParamSet& p) { return p; }

}  // namespace

TrainResult train(const Experiment& ex, const std::function<void(const EpochLog&)>& on_epoch) {
  const Model model(ex.config, ex.shape(), ex.stats);
  ParamSet params = model.init_params(ex.config.seed);
  OptimState opt;
  AdamConfig adam;
  adam.lr = ex.config.resolved_lr(ex.event_based());
  EarlyStopping stopper(ex.config.patience);
  TrainResult result;
  MemoryState memory = model.fresh_memory();
  for (std::size_t epoch = 0; epoch < ex.config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochLog log = train_epoch(model, params, opt, adam, memory, ex, epoch);
    const EvalReport val = evaluate(ex, params, memory, SplitName::kVal, EvalMode::kTransductive);
    log.val_ap = val.ap;
    log.val_auc = val.auc;
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.epochs.push_back(log);
    const bool stop = stopper.observe(log.val_ap);
    if (stopper.improved()) {
      result.params = copy_params(params);
      result.memory = memory;
    }
    if (on_epoch) on_epoch(log);
    if (stop) {
      result.stopped_early = true;
      break;
    }
  }
  result.best_epoch = stopper.best_epoch();
  result.best_val_ap = stopper.best_score();
  return result;
}

EvalReport evaluate(const Experiment& ex, const ParamSet& params, const MemoryState& train_end,
                    SplitName split, EvalMode mode) {
  if (mode == EvalMode::kInductive && ex.mask.unseen.empty())
    throw DataError("inductive evaluation needs unseen nodes (unseen_fraction is 0)");
  const Model model(ex.config, ex.shape(), ex.stats);
  const std::uint64_t seed = ex.config.seed;
  if (split == SplitName::kTrain) {
    MemoryState memory = model.fresh_memory();
    const auto s = replay(model, params, memory, ex.mask.train, ex.mask.train.events(),
                          ex.mask.train.destinations(), seed, SplitName::kTrain, 0, false);
    return score_report(ex, ex.mask.train.events(), s, split, mode);
  }
  const std::vector<NodeId> candidates = ex.store.destinations();
  MemoryState memory = train_end;
  if (split == SplitName::kTest)
    for (const auto batch : iterate_batches(ex.val, ex.config.batch_size))
      model.memory_module().stage_and_apply(params, memory, batch);
  const EventStore& events = split == SplitName::kVal ? ex.val : ex.test;
  const auto s = replay(model, params, memory, ex.store, events.events(), candidates, seed, split,
                        0, true);
  return score_report(ex, events.events(), s, split, mode);
}

Checkpoint TrainResult::checkpoint(const Experiment& ex) const {
  Checkpoint ckpt;
  ckpt.step = best_epoch;
  ckpt.put_params("param/", params);
  memory.save(ckpt, "memory/");
  ckpt.meta["best_epoch"] = std::to_string(best_epoch);
  ckpt.meta["best_val_ap"] = std::to_string(best_val_ap);
  ckpt.meta["num_nodes"] = std::to_string(ex.store.num_nodes());
  ckpt.meta["edge_dim"] = std::to_string(ex.store.edge_dim());
  ckpt.meta["has_duration"] = ex.store.has_duration() ? "1" : "0";
  ckpt.meta["config"] = config_to_json(ex.config).dump();
  return ckpt;
}

Restored restore(const Experiment& ex, const Checkpoint& ckpt) {
  const auto meta = [&](const std::string& key) {
    auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end()) throw DataError("checkpoint lacks metadata '" + key + "'");
    return it->second;
  };
  if (std::stoull(meta("num_nodes")) != ex.store.num_nodes() ||
      std::stoull(meta("edge_dim")) != ex.store.edge_dim() ||
      (meta("has_duration") == "1") != ex.store.has_duration())
    throw DataError("checkpoint does not match the dataset (node count, edge width or duration)");
  const Model model(ex.config, ex.shape(), ex.stats);
  Restored r;
  r.params = model.init_params(ex.config.seed);
  try {
    ckpt.load_params("param/", r.params);
  } catch (const std::exception& e) {
    throw DataError(std::string("checkpoint does not match the configured model: ") + e.what());
  }
  r.memory = MemoryState::load(ckpt, "memory/");
  if (r.memory.num_nodes() != ex.store.num_nodes() || r.memory.dim() != ex.config.dim)
    throw DataError("checkpoint memory table does not match the configured model");
  return r;
}

}  // namespace ctgn
