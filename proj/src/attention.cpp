#include "ctgn/attention.hpp"

#include "ctgn/diff/layers.hpp"
#include "ctgn/errors.hpp"
#include "ctgn/time_codec.hpp"

namespace ctgn {

using namespace ctgn::ops;

Var attention(Var q, Var k, Var v, std::size_t heads, Tensor* weights_out) {
  const std::size_t m = q.rows(), n = k.rows();
  CTGN_REQUIRE(v.rows() == n, "attention: key and value row counts differ");
  CTGN_REQUIRE(k.cols() == q.cols() && v.cols() == q.cols(), "attention: inner dimensions differ");
  std::vector<std::ptrdiff_t> tile(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) tile[i * n + j] = static_cast<std::ptrdiff_t>(j);
  const std::vector<std::size_t> counts(m, n);
  return multihead_attention(q, gather_rows(k, tile), gather_rows(v, tile), counts, heads, n,
                             weights_out);
}

NeighborContext build_context(const ParamVars& p, const std::string& time_prefix,
                              std::span<const NodeQuery> queries,
                              std::span<const std::vector<Neighbor>> neighbors, Var prev,
                              std::size_t embed_dim, std::size_t edge_dim, std::size_t slots) {
  CTGN_REQUIRE(neighbors.size() == queries.size(), "build_context: one neighbour list per query");
  CTGN_REQUIRE(slots >= 1, "build_context: need at least one slot");
  Tape& tape = p.tape();
  NeighborContext ctx;
  ctx.slots = slots;
  ctx.counts.resize(queries.size());
  std::vector<double> deltas;
  std::vector<double> feats;
  std::vector<std::ptrdiff_t> index(queries.size() * slots, -1);
  std::size_t live = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto& nb = neighbors[q];
    CTGN_REQUIRE(nb.size() <= slots, "build_context: more neighbours than slots");
    for (std::size_t j = 0; j < nb.size(); ++j) {
      CTGN_REQUIRE(nb[j].t < queries[q].t,
              "build_context: neighbour event at t=" + std::to_string(nb[j].t) +
                  " is not before query time t=" + std::to_string(queries[q].t));
      CTGN_REQUIRE(nb[j].edge_feat.size() == edge_dim, "build_context: edge feature width mismatch");
      deltas.push_back(queries[q].t - nb[j].t);
      feats.insert(feats.end(), nb[j].edge_feat.begin(), nb[j].edge_feat.end());
      index[q * slots + j] = static_cast<std::ptrdiff_t>(live++);
    }
    ctx.counts[q] = std::max<std::size_t>(1, nb.size());
  }
  const std::size_t time_dim = p[time_prefix + "/omega"].cols();
  const std::size_t width = embed_dim + edge_dim + time_dim;
  if (live == 0) {
    ctx.rows = tape.constant(Tensor::zeros(queries.size() * slots, width));
    return ctx;
  }
  CTGN_REQUIRE(prev.valid() && prev.rows() == live && prev.cols() == embed_dim,
          "build_context: previous-layer embeddings must have one row per neighbour");
  std::vector<Var> parts{prev};
  if (edge_dim) parts.push_back(tape.constant(Tensor::matrix(live, edge_dim, std::move(feats))));
  parts.push_back(encode_time(p, time_prefix, deltas));
  ctx.rows = gather_rows(concat_cols(parts), index);
  return ctx;
}

TemporalEncoder::TemporalEncoder(AttentionConfig config) : config_(std::move(config)) {
  CTGN_REQUIRE(config_.heads >= 1 && config_.attn_dim % config_.heads == 0,
          "attention width must be divisible by the head count");
  CTGN_REQUIRE(config_.neighbors >= 1, "neighbour sample size must be at least 1");
}

void TemporalEncoder::add_params(ParamSet& params, std::mt19937_64& rng) const {
  const auto& c = config_;
  const std::size_t time_dim = params.at(c.time_prefix + "/omega").cols();
  for (std::size_t l = 1; l <= c.layers; ++l) {
    const std::string pre = "attn" + std::to_string(l);
    nn::add_linear(params, pre + "/q", c.embed_dim + time_dim, c.attn_dim, rng, false);
    nn::add_linear(params, pre + "/k", c.embed_dim + c.edge_dim + time_dim, c.attn_dim, rng, false);
    nn::add_linear(params, pre + "/v", c.embed_dim + c.edge_dim + time_dim, c.attn_dim, rng, false);
    nn::add_linear(params, pre + "/out", c.attn_dim + c.embed_dim, c.embed_dim, rng, true);
  }
}

void TemporalEncoder::set_node_features(Tensor features) {
  const std::size_t n = features.rows(), d = config_.embed_dim;
  Tensor fitted = Tensor::zeros(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < std::min(d, features.cols()); ++c) fitted(r, c) = features(r, c);
  node_features_ = std::make_shared<const Tensor>(std::move(fitted));
}

Var TemporalEncoder::encode(const ParamVars& p, const MemoryView& memory,
                            const EventStore& history, std::span<const NodeQuery> queries,
                            Tensor* weights_out) const {
  CTGN_REQUIRE(!queries.empty(), "encode: no queries");
  return embed(p, memory, history, queries, config_.layers, weights_out);
}

Var TemporalEncoder::embed(const ParamVars& p, const MemoryView& memory, const EventStore& history,
                           std::span<const NodeQuery> queries, std::size_t layer,
                           Tensor* weights_out) const {
  Tape& tape = p.tape();
  if (layer == 0) {
    std::vector<NodeId> nodes;
    nodes.reserve(queries.size());
    for (const auto& q : queries) nodes.push_back(q.node);
    Var h = memory.rows(nodes);
    if (!node_features_) return h;
    Tensor feats = Tensor::zeros(nodes.size(), config_.embed_dim);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] < node_features_->rows())
        for (std::size_t c = 0; c < config_.embed_dim; ++c) feats(i, c) = (*node_features_)(nodes[i], c);
    return add(h, tape.constant(std::move(feats)));
  }

  Var self = embed(p, memory, history, queries, layer - 1, nullptr);
  std::vector<std::vector<Neighbor>> neighbors(queries.size());
  std::vector<NodeQuery> nb_queries;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    neighbors[i] = sample_neighbors(history, queries[i].node, queries[i].t, config_.neighbors);
    for (const auto& nb : neighbors[i]) nb_queries.push_back({nb.node, nb.t});
  }
  Var prev = nb_queries.empty() ? Var() : embed(p, memory, history, nb_queries, layer - 1, nullptr);
  const NeighborContext ctx =
      build_context(p, config_.time_prefix, queries, neighbors, prev, config_.embed_dim,
                    config_.edge_dim, config_.neighbors);

  const std::string pre = "attn" + std::to_string(layer);
  const std::vector<double> zero_dt(queries.size(), 0.0);
  const std::vector<Var> q_parts{self, encode_time(p, config_.time_prefix, zero_dt)};
  Var q = nn::linear(p, pre + "/q", concat_cols(q_parts), false);
  Var k = nn::linear(p, pre + "/k", ctx.rows, false);
  Var v = nn::linear(p, pre + "/v", ctx.rows, false);
  Var attended = multihead_attention(q, k, v, ctx.counts, config_.heads, ctx.slots, weights_out);
  const std::vector<Var> out_parts{attended, self};
  return nn::linear(p, pre + "/out", concat_cols(out_parts), true);
}

}  // namespace ctgn
