#pragma once

#include <span>
#include <vector>

#include "ctgn/attention.hpp"
#include "ctgn/decoders.hpp"
#include "ctgn/memory.hpp"
#include "ctgn/ode.hpp"
#include "ctgn/train/config.hpp"

namespace ctgn {

struct ModelShape {
  std::size_t num_nodes = 0;
  std::size_t edge_dim = 0;
  bool has_duration = true;
};

// Outputs of one batch. Query rows are interleaved per event as
// (src, dst, negative), so row 3i..3i+2 belongs to event i.
struct BatchForward {
  MemoryUpdate update;
  Var z;           // 3B x dim evolved embeddings
  Var pos_logits;  // B x 1
  Var neg_logits;  // B x 1
  Var smoothness;  // 1 x 1
};

// The full link-prediction pipeline:
// memory -> temporal attention -> ODE over the duration -> LSTM decoder.
class Model {
 public:
  Model(const TrainConfig& config, ModelShape shape, DurationStats stats);

  const TrainConfig& config() const { return config_; }
  const ModelShape& shape() const { return shape_; }
  const DurationStats& stats() const { return stats_; }
  const MemoryModule& memory_module() const { return memory_; }
  const TemporalEncoder& encoder() const { return encoder_; }
  const OdeFunc& ode() const { return ode_; }
  const LinkDecoder& link() const { return link_; }

  ParamSet init_params(std::uint64_t seed) const;
  MemoryState fresh_memory() const { return MemoryState(shape_.num_nodes, config_.dim); }

  // Raw integration horizons per query row: the event duration, or each
  // node's time since its last memory update for contact sequences.
  std::vector<double> horizons(const MemoryView& view, std::span<const Event> batch,
                               std::span<const NodeId> negatives) const;

  // Encodes and evolves the 3B query rows of `batch` against `memory`,
  // which must not yet include the batch's staged messages.
  BatchForward forward(const ParamVars& p, const MemoryState& memory, const EventStore& history,
                       std::span<const Event> batch, std::span<const NodeId> negatives,
                       bool allow_unknown = false) const;

  // Smoothness of phi over the batch's sorted unique timestamps, taken as
  // offsets from the batch's first event.
  Var smoothness(const ParamVars& p, std::span<const Event> batch) const;

  // Link loss, plus the classifier's cross-entropy on the batch's labelled
  // source embeddings when co-training.
  Var loss(const ParamVars& p, const BatchForward& out, std::span<const Event> batch) const;
  bool cotrain() const { return cotrain_; }
  const NodeClassifier& classifier() const { return classifier_; }
  double alpha() const { return alpha_; }

 private:
  TrainConfig config_;
  ModelShape shape_;
  DurationStats stats_;
  double alpha_;
  MemoryModule memory_;
  TemporalEncoder encoder_;
  OdeFunc ode_;
  LinkDecoder link_;
  NodeClassifier classifier_;
  bool cotrain_;
};

}  // namespace ctgn
