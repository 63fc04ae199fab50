#pragma once

#include <map>
#include <random>
#include <span>
#include <vector>

#include "ctgn/diff/checkpoint.hpp"
#include "ctgn/diff/params.hpp"
#include "ctgn/graph/event_store.hpp"

namespace ctgn {

// Inputs of one node's message, kept raw until the next batch applies them.
struct RawMessage {
  NodeId owner = 0;
  NodeId other = 0;
  double t = 0.0;
  double delta = 0.0;  // duration, or t - t_prev in contact-sequence mode
  std::vector<double> edge_feat;

  friend bool operator==(const RawMessage&, const RawMessage&) = default;
};

using MessageMap = std::map<NodeId, RawMessage>;

// Per-node memory table s_i, last update times, and the messages staged by
// the most recent batch. Untouched nodes read as zero vectors.
class MemoryState {
 public:
  MemoryState() = default;
  MemoryState(std::size_t num_nodes, std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t num_nodes() const { return num_nodes_; }

  std::span<const double> memory(NodeId node) const;
  double last_update(NodeId node) const;
  const MessageMap& staged() const { return staged_; }
  // Latest event time of any batch fed through finish_batch.
  double watermark() const { return watermark_; }

  void write(NodeId node, std::span<const double> value, double t);
  void set_staged(MessageMap staged) { staged_ = std::move(staged); }
  void set_watermark(double t) { watermark_ = t; }
  void reset();

  void save(Checkpoint& ckpt, const std::string& prefix) const;
  static MemoryState load(const Checkpoint& ckpt, const std::string& prefix);

  friend bool operator==(const MemoryState&, const MemoryState&) = default;

 private:
  std::size_t num_nodes_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> table_;
  std::vector<double> last_update_;
  MessageMap staged_;
  double watermark_ = 0.0;
};

struct MemoryConfig {
  std::size_t dim = 172;
  std::size_t edge_dim = 0;
  std::string time_prefix = "time";
  bool has_duration = true;
  bool duration_blind = false;  // ablation: every message sees delta = 0
};

// New memory rows produced inside a tape for the nodes that had a message.
struct MemoryUpdate {
  std::vector<NodeId> nodes;
  std::vector<double> times;
  Var values;  // nodes.size() x dim, unbound when there were no messages
};

// Message function and memory updater, both GRU cells:
//   m_i = GRU_msg(s_i || s_j || phi(delta) || e_ij, s_i)
//   s_i' = GRU_mem(m_i, s_i)
class MemoryModule {
 public:
  explicit MemoryModule(MemoryConfig config) : config_(std::move(config)) {}

  const MemoryConfig& config() const { return config_; }
  void add_params(ParamSet& params, std::mt19937_64& rng) const;

  // One message per node of the batch, from its latest interaction in it.
  MessageMap compute_messages(std::span<const Event> batch, const MemoryState& memory) const;

  MemoryUpdate update(const ParamVars& p, const MemoryState& memory,
                      const MessageMap& messages) const;

  // Commits update values, advances last_update and stages the batch's own
  // messages for the next batch.
  void finish_batch(MemoryState& memory, const MemoryUpdate& update,
                    std::span<const Event> batch) const;

  // Eager batch step outside training: applies what the previous batch
  // staged, then stages this batch.
  void stage_and_apply(const ParamSet& params, MemoryState& memory,
                       std::span<const Event> batch) const;

  // Eager memory update with explicit messages (no staging).
  void update_memory(const ParamSet& params, MemoryState& memory,
                     const MessageMap& messages) const;

 private:
  MemoryConfig config_;
};

// Read access to memory during one batch: rows updated in the tape come from
// the update, the rest from the frozen table.
class MemoryView {
 public:
  MemoryView(Tape& tape, const MemoryState& memory, const MemoryUpdate* update,
             bool allow_unknown_nodes = false);

  Var rows(std::span<const NodeId> nodes) const;
  double last_update(NodeId node) const;

 private:
  Tape* tape_;
  const MemoryState* memory_;
  const MemoryUpdate* update_;
  std::map<NodeId, std::size_t> updated_row_;
  bool allow_unknown_;
};

}  // namespace ctgn
