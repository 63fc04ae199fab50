#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ctgn/diff/adam.hpp"
#include "ctgn/diff/checkpoint.hpp"
#include "ctgn/graph/split.hpp"
#include "ctgn/train/model.hpp"

namespace ctgn {

enum class SplitName { kTrain, kVal, kTest };
enum class EvalMode { kTransductive, kInductive };

SplitName parse_split(const std::string& name);
EvalMode parse_mode(const std::string& name);
std::string to_string(SplitName split);
std::string to_string(EvalMode mode);

// A dataset cut into chronological splits with the unseen-node mask.
struct Experiment {
  TrainConfig config;
  EventStore store;
  ChronoSplit split;
  InductiveMask mask;
  EventStore val;
  EventStore test;
  DurationStats stats;

  ModelShape shape() const { return {store.num_nodes(), store.edge_dim(), store.has_duration()}; }
  bool event_based() const { return store.has_duration(); }
};

// Reads the CSV named by config.data, or generates the synthetic stream.
EventStore load_dataset(const TrainConfig& config);
Experiment prepare_experiment(const TrainConfig& config, EventStore store);

// Stops once the score has failed to improve for `patience` consecutive
// observations.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}
  // Returns true when training should stop.
  bool observe(double score);
  bool improved() const { return bad_epochs_ == 0; }
  std::size_t best_epoch() const { return best_epoch_; }  // 1-based
  double best_score() const { return best_; }
  std::size_t epochs() const { return epochs_; }

 private:
  std::size_t patience_;
  std::size_t epochs_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t bad_epochs_ = 0;
  double best_ = 0.0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_task = 0.0;
  double train_smooth = 0.0;
  double val_ap = 0.0;
  double val_auc = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  double best_val_ap = 0.0;
  ParamSet params;     // best validation epoch
  MemoryState memory;  // end of that epoch's training pass
  bool stopped_early = false;

  Checkpoint checkpoint(const Experiment& ex) const;
};

struct BatchScores {
  std::vector<double> pos;
  std::vector<double> neg;
};

// Per-batch hook during replay; `z` holds the interleaved query embeddings.
using ReplayHook = std::function<void(std::size_t batch_index, std::span<const Event> batch,
                                      const BatchForward& out)>;

// Negative-sampling seed of a batch. Every epoch of training has its own
// stream; evaluation splits share one stream per root seed.
std::uint64_t negative_seed(std::uint64_t root, SplitName split, std::size_t epoch,
                            std::size_t batch);

// Frozen-parameter forward over `events` in batches, continuing `memory`.
// Returns positive and negative probabilities per event.
BatchScores replay(const Model& model, const ParamSet& params, MemoryState& memory,
                   const EventStore& history, std::span<const Event> events,
                   std::span<const NodeId> candidates, std::uint64_t root_seed, SplitName split,
                   std::size_t epoch, bool allow_unknown, const ReplayHook& hook = {});

// One training epoch from reset memory; returns mean loss terms and leaves
// `memory` at the end-of-train state.
EpochLog train_epoch(const Model& model, ParamSet& params, OptimState& opt, const AdamConfig& adam,
                     MemoryState& memory, const Experiment& ex, std::size_t epoch,
                     std::vector<BatchScores>* scores = nullptr);

TrainResult train(const Experiment& ex,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

struct EvalReport {
  std::string split;
  std::string mode;
  std::size_t events = 0;
  double ap = 0.0;
  double auc = 0.0;
};

// Replays from the train-end memory through val (and test) and scores the
// events of the requested mode.
EvalReport evaluate(const Experiment& ex, const ParamSet& params, const MemoryState& train_end,
                    SplitName split, EvalMode mode);

// Training-end state restored from a checkpoint.
struct Restored {
  ParamSet params;
  MemoryState memory;
};
Restored restore(const Experiment& ex, const Checkpoint& ckpt);

}  // namespace ctgn
