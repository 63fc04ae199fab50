#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ctgn/diff/params.hpp"
#include "ctgn/graph/event_store.hpp"
#include "ctgn/graph/neighbors.hpp"
#include "ctgn/memory.hpp"

namespace ctgn {

struct AttentionConfig {
  std::size_t embed_dim = 172;  // memory / layer output width
  std::size_t attn_dim = 172;   // d_k, width of Q/K/V
  std::size_t edge_dim = 0;
  std::string time_prefix = "time";
  std::size_t layers = 1;
  std::size_t heads = 2;
  std::size_t neighbors = 10;
};

struct NodeQuery {
  NodeId node = 0;
  double t = 0.0;
};

// Single-layer scaled dot-product attention of every query row over the
// same key/value rows: softmax(Q K^T / sqrt(d/heads)) V per head.
Var attention(Var q, Var k, Var v, std::size_t heads = 1, Tensor* weights_out = nullptr);

// Neighbourhood rows [h_prev(n) || e(n) || phi(t - t_n)] for a batch of
// queries, laid out as `slots` rows per query (zero rows pad short
// histories; an empty history is one zero row). `prev` holds one embedding
// row per neighbour, concatenated over queries in order.
struct NeighborContext {
  Var rows;                         // (queries * slots) x (embed + edge + time)
  std::vector<std::size_t> counts;  // live rows per query, >= 1
  std::size_t slots = 1;
};

NeighborContext build_context(const ParamVars& p, const std::string& time_prefix,
                              std::span<const NodeQuery> queries,
                              std::span<const std::vector<Neighbor>> neighbors, Var prev,
                              std::size_t embed_dim, std::size_t edge_dim, std::size_t slots);

// Multi-head temporal graph attention encoder. Layer 0 is memory plus
// optional static node features; layer l attends from
// (h^{l-1}_i || phi(0)) W_Q over the neighbour context projected by W_K, W_V,
// then mixes [attention || h^{l-1}_i] through an output projection.
class TemporalEncoder {
 public:
  explicit TemporalEncoder(AttentionConfig config);

  const AttentionConfig& config() const { return config_; }
  void add_params(ParamSet& params, std::mt19937_64& rng) const;

  // Rows zero-padded or truncated to embed_dim; one row per node id.
  void set_node_features(Tensor features);

  // One embedding row per query. `weights_out`, if set, receives the top
  // layer's attention weights ((queries * heads) x slots).
  Var encode(const ParamVars& p, const MemoryView& memory, const EventStore& history,
             std::span<const NodeQuery> queries, Tensor* weights_out = nullptr) const;

 private:
  Var embed(const ParamVars& p, const MemoryView& memory, const EventStore& history,
            std::span<const NodeQuery> queries, std::size_t layer, Tensor* weights_out) const;

  AttentionConfig config_;
  std::shared_ptr<const Tensor> node_features_;
};

}  // namespace ctgn
