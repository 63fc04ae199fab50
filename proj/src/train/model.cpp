#include "ctgn/train/model.hpp"

#include "ctgn/diff/ops.hpp"
#include "ctgn/errors.hpp"
#include "ctgn/seed.hpp"
#include "ctgn/time_codec.hpp"
#include "ctgn/train/metrics.hpp"

namespace ctgn {

using namespace ctgn::ops;

namespace {

MemoryConfig memory_config(const TrainConfig& c, const ModelShape& s) {
  MemoryConfig m;
  m.dim = c.dim;
  m.edge_dim = s.edge_dim;
  m.has_duration = s.has_duration;
  m.duration_blind = c.duration_blind;
  return m;
}

AttentionConfig attention_config(const TrainConfig& c, const ModelShape& s) {
  AttentionConfig a;
  a.embed_dim = c.dim;
  a.attn_dim = c.dim;
  a.edge_dim = s.edge_dim;
  a.layers = c.layers;
  a.heads = c.heads;
  a.neighbors = c.neighbors;
  return a;
}

}  // namespace

Model::Model(const TrainConfig& config, ModelShape shape, DurationStats stats)
    : config_(config),
      shape_(shape),
      stats_(stats),
      alpha_(config.resolved_alpha(shape.has_duration)),
      memory_(memory_config(config, shape)),
      encoder_(attention_config(config, shape)),
      ode_{"ode", config.dim, config.ode_hidden},
      link_{"link", config.dim, config.dim},
      classifier_{"cls", config.dim, config.cls_hidden, 2, config.dropout},
      cotrain_(config.node_classification && config.cotrain) {
  config_.solver.validate();
}

ParamSet Model::init_params(std::uint64_t seed) const {
  std::mt19937_64 rng(derive_seed(seed, SeedStream::kInit));
  ParamSet params;
  add_time_encoder(params, "time", config_.time_dim);
  memory_.add_params(params, rng);
  encoder_.add_params(params, rng);
  ode_.add_params(params, rng);
  link_.add_params(params, rng);
  if (cotrain_) classifier_.add_params(params, rng);
  return params;
}

std::vector<double> Model::horizons(const MemoryView& view, std::span<const Event> batch,
                                    std::span<const NodeId> negatives) const {
  std::vector<double> out(3 * batch.size(), 0.0);
  if (config_.duration_blind) return out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Event& e = batch[i];
    if (shape_.has_duration) {
      out[3 * i] = out[3 * i + 1] = out[3 * i + 2] = e.duration;
    } else {
      out[3 * i] = std::max(0.0, e.t - view.last_update(e.src));
      out[3 * i + 1] = std::max(0.0, e.t - view.last_update(e.dst));
      out[3 * i + 2] = std::max(0.0, e.t - view.last_update(negatives[i]));
    }
  }
  return out;
}

BatchForward Model::forward(const ParamVars& p, const MemoryState& memory,
                            const EventStore& history, std::span<const Event> batch,
                            std::span<const NodeId> negatives, bool allow_unknown) const {
  CTGN_REQUIRE(!batch.empty(), "forward: empty batch");
  CTGN_REQUIRE(negatives.size() == batch.size(), "forward: one negative per event");
  BatchForward out;
  out.update = memory_.update(p, memory, memory.staged());
  const MemoryView view(p.tape(), memory, &out.update, allow_unknown);

  std::vector<NodeQuery> queries;
  queries.reserve(3 * batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    queries.push_back({batch[i].src, batch[i].t});
    queries.push_back({batch[i].dst, batch[i].t});
    queries.push_back({negatives[i], batch[i].t});
  }
  const std::vector<double> raw = horizons(view, batch, negatives);

  Var h = encoder_.encode(p, view, history, queries);
  out.z = evolve_embedding(p, ode_, h, raw, config_.solver, stats_, config_.duration_blind);

  std::vector<std::ptrdiff_t> src(batch.size()), dst(batch.size()), neg(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    src[i] = static_cast<std::ptrdiff_t>(3 * i);
    dst[i] = src[i] + 1;
    neg[i] = src[i] + 2;
  }
  Var z_src = gather_rows(out.z, src);
  out.pos_logits = link_.logits(p, z_src, gather_rows(out.z, dst));
  out.neg_logits = link_.logits(p, z_src, gather_rows(out.z, neg));
  out.smoothness = smoothness(p, batch);
  return out;
}

Var Model::smoothness(const ParamVars& p, std::span<const Event> batch) const {
  std::vector<double> times;
  times.reserve(batch.size());
  for (const Event& e : batch) times.push_back(e.t - batch.front().t);
  return smoothness_loss(encode_time(p, "time", unique_sorted(times)));
}

Var Model::loss(const ParamVars& p, const BatchForward& out, std::span<const Event> batch) const {
  Var l = total_loss(out.pos_logits, out.neg_logits, out.smoothness, alpha_);
  if (!cotrain_) return l;
  std::vector<std::ptrdiff_t> rows;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch[i].label) continue;
    rows.push_back(static_cast<std::ptrdiff_t>(3 * i));
    labels.push_back(*batch[i].label == 0 ? 0 : 1);
  }
  if (rows.empty()) return l;
  return add(l, softmax_cross_entropy(classifier_.logits(p, gather_rows(out.z, rows)), labels));
}

}  // namespace ctgn
