#include "ctgn/memory.hpp"

#include <algorithm>

#include "ctgn/diff/layers.hpp"
#include "ctgn/errors.hpp"
#include "ctgn/time_codec.hpp"

namespace ctgn {

using namespace ctgn::ops;

MemoryState::MemoryState(std::size_t num_nodes, std::size_t dim)
    : num_nodes_(num_nodes), dim_(dim), table_(num_nodes * dim, 0.0), last_update_(num_nodes, 0.0) {
  CTGN_REQUIRE(dim >= 1, "memory dimension must be at least 1");
}

std::span<const double> MemoryState::memory(NodeId node) const {
  CTGN_REQUIRE(node < num_nodes_, "memory: node id " + std::to_string(node) + " outside table");
  return std::span<const double>(table_).subspan(static_cast<std::size_t>(node) * dim_, dim_);
}

double MemoryState::last_update(NodeId node) const {
  return node < num_nodes_ ? last_update_[node] : 0.0;
}

void MemoryState::write(NodeId node, std::span<const double> value, double t) {
  CTGN_REQUIRE(node < num_nodes_, "memory: node id " + std::to_string(node) + " outside table");
  CTGN_REQUIRE(value.size() == dim_, "memory: row width mismatch");
  CTGN_REQUIRE(t >= last_update_[node], "memory: update at t=" + std::to_string(t) +
                                       " precedes last update of node " + std::to_string(node));
  std::copy(value.begin(), value.end(), table_.begin() + static_cast<std::ptrdiff_t>(node * dim_));
  last_update_[node] = t;
}

void MemoryState::reset() {
  std::fill(table_.begin(), table_.end(), 0.0);
  std::fill(last_update_.begin(), last_update_.end(), 0.0);
  staged_.clear();
  watermark_ = 0.0;
}

void MemoryState::save(Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.put(prefix + "table", Tensor({num_nodes_, dim_}, table_));
  ckpt.put(prefix + "last_update", Tensor({num_nodes_}, last_update_));
  ckpt.put(prefix + "watermark", Tensor::scalar(watermark_));
  // Staged messages: one row per message, [owner, other, t, delta, feats...].
  const std::size_t width = 4 + (staged_.empty() ? 0 : staged_.begin()->second.edge_feat.size());
  ckpt.put(prefix + "staged_count", Tensor::scalar(static_cast<double>(staged_.size())));
  if (!staged_.empty()) {
    Tensor rows = Tensor::zeros(staged_.size(), width);
    std::size_t r = 0;
    for (const auto& [_, m] : staged_) {
      rows(r, 0) = m.owner;
      rows(r, 1) = m.other;
      rows(r, 2) = m.t;
      rows(r, 3) = m.delta;
      for (std::size_t k = 0; k < m.edge_feat.size(); ++k) rows(r, 4 + k) = m.edge_feat[k];
      ++r;
    }
    ckpt.put(prefix + "staged", std::move(rows));
  }
}

MemoryState MemoryState::load(const Checkpoint& ckpt, const std::string& prefix) {
  const Tensor& table = ckpt.get(prefix + "table");
  MemoryState m(table.shape()[0], table.shape()[1]);
  m.table_.assign(table.data().begin(), table.data().end());
  const Tensor& lu = ckpt.get(prefix + "last_update");
  m.last_update_.assign(lu.data().begin(), lu.data().end());
  m.watermark_ = ckpt.get(prefix + "watermark").item();
  if (ckpt.get(prefix + "staged_count").item() > 0) {
    const Tensor& rows = ckpt.get(prefix + "staged");
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      RawMessage msg;
      msg.owner = static_cast<NodeId>(rows(r, 0));
      msg.other = static_cast<NodeId>(rows(r, 1));
      msg.t = rows(r, 2);
      msg.delta = rows(r, 3);
      for (std::size_t k = 4; k < rows.cols(); ++k) msg.edge_feat.push_back(rows(r, k));
      m.staged_.emplace(msg.owner, std::move(msg));
    }
  }
  return m;
}

void MemoryModule::add_params(ParamSet& params, std::mt19937_64& rng) const {
  const auto& c = config_;
  const std::size_t time_dim = params.at(c.time_prefix + "/omega").cols();
  const std::size_t msg_in = 2 * c.dim + time_dim + c.edge_dim;
  nn::add_gru(params, "msg", msg_in, c.dim, rng);
  nn::add_gru(params, "mem", c.dim, c.dim, rng);
}

MessageMap MemoryModule::compute_messages(std::span<const Event> batch,
                                          const MemoryState& memory) const {
  MessageMap out;
  const auto delta_for = [&](NodeId owner, const Event& e) {
    if (config_.duration_blind) return 0.0;
    if (config_.has_duration) return e.duration;
    return std::max(0.0, e.t - memory.last_update(owner));
  };
  // Later events overwrite earlier ones: latest interaction wins.
  for (const Event& e : batch) {
    out[e.src] = RawMessage{e.src, e.dst, e.t, delta_for(e.src, e), e.edge_feat};
    out[e.dst] = RawMessage{e.dst, e.src, e.t, delta_for(e.dst, e), e.edge_feat};
  }
  return out;
}

MemoryUpdate MemoryModule::update(const ParamVars& p, const MemoryState& memory,
                                  const MessageMap& messages) const {
  MemoryUpdate upd;
  if (messages.empty()) return upd;
  Tape& tape = p.tape();
  const std::size_t n = messages.size(), d = config_.dim;
  Tensor own = Tensor::zeros(n, d), other = Tensor::zeros(n, d);
  std::vector<double> deltas;
  deltas.reserve(n);
  Tensor feats = config_.edge_dim ? Tensor::zeros(n, config_.edge_dim) : Tensor();
  std::size_t r = 0;
  for (const auto& [node, m] : messages) {
    CTGN_REQUIRE(m.t >= memory.last_update(node),
            "update_memory: message at t=" + std::to_string(m.t) + " for node " +
                std::to_string(node) + " precedes its last update");
    CTGN_REQUIRE(m.edge_feat.size() == config_.edge_dim, "update_memory: edge feature width mismatch");
    auto s_own = memory.memory(m.owner);
    auto s_other = memory.memory(m.other);
    std::copy(s_own.begin(), s_own.end(), own.row_span(r).begin());
    std::copy(s_other.begin(), s_other.end(), other.row_span(r).begin());
    for (std::size_t k = 0; k < config_.edge_dim; ++k) feats(r, k) = m.edge_feat[k];
    deltas.push_back(m.delta);
    upd.nodes.push_back(node);
    upd.times.push_back(m.t);
    ++r;
  }
  Var s_prev = tape.constant(std::move(own));
  std::vector<Var> parts{s_prev, tape.constant(std::move(other)),
                         encode_time(p, config_.time_prefix, deltas)};
  if (config_.edge_dim) parts.push_back(tape.constant(std::move(feats)));
  Var msg = nn::gru_cell(p, "msg", concat_cols(parts), s_prev);
  upd.values = nn::gru_cell(p, "mem", msg, s_prev);
  return upd;
}

void MemoryModule::finish_batch(MemoryState& memory, const MemoryUpdate& update,
                                std::span<const Event> batch) const {
  if (!batch.empty())
    CTGN_REQUIRE(batch.front().t >= memory.watermark(),
            "memory: batch starting at t=" + std::to_string(batch.front().t) +
                " arrives after one ending at t=" + std::to_string(memory.watermark()));
  for (std::size_t i = 0; i < update.nodes.size(); ++i)
    memory.write(update.nodes[i], update.values.value().row_span(i), update.times[i]);
  memory.set_staged(compute_messages(batch, memory));
  if (!batch.empty()) memory.set_watermark(batch.back().t);
}

void MemoryModule::stage_and_apply(const ParamSet& params, MemoryState& memory,
                                   std::span<const Event> batch) const {
  if (!batch.empty())
    CTGN_REQUIRE(batch.front().t >= memory.watermark(), "stage_and_apply: out-of-order batch");
  Tape tape;
  ParamVars p(tape, params, false);
  const MemoryUpdate upd = update(p, memory, memory.staged());
  finish_batch(memory, upd, batch);
}

void MemoryModule::update_memory(const ParamSet& params, MemoryState& memory,
                                 const MessageMap& messages) const {
  Tape tape;
  ParamVars p(tape, params, false);
  const MemoryUpdate upd = update(p, memory, messages);
  for (std::size_t i = 0; i < upd.nodes.size(); ++i)
    memory.write(upd.nodes[i], upd.values.value().row_span(i), upd.times[i]);
}

MemoryView::MemoryView(Tape& tape, const MemoryState& memory, const MemoryUpdate* update,
                       bool allow_unknown_nodes)
    : tape_(&tape), memory_(&memory), update_(update), allow_unknown_(allow_unknown_nodes) {
  if (update_)
    for (std::size_t i = 0; i < update_->nodes.size(); ++i) updated_row_[update_->nodes[i]] = i;
}

Var MemoryView::rows(std::span<const NodeId> nodes) const {
  const std::size_t d = memory_->dim();
  const std::size_t n_updated = update_ && update_->values.valid() ? update_->nodes.size() : 0;
  std::vector<std::ptrdiff_t> index(nodes.size());
  std::vector<double> frozen;
  std::size_t n_frozen = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeId node = nodes[i];
    if (auto it = updated_row_.find(node); it != updated_row_.end()) {
      index[i] = static_cast<std::ptrdiff_t>(it->second);
      continue;
    }
    if (node >= memory_->num_nodes()) {
      if (!allow_unknown_) throw DataError("unknown node id " + std::to_string(node));
      index[i] = -1;  // zero memory
      continue;
    }
    auto row = memory_->memory(node);
    frozen.insert(frozen.end(), row.begin(), row.end());
    index[i] = static_cast<std::ptrdiff_t>(n_updated + n_frozen++);
  }
  std::vector<Var> parts;
  if (n_updated) parts.push_back(update_->values);
  if (n_frozen) parts.push_back(tape_->constant(Tensor::matrix(n_frozen, d, std::move(frozen))));
  if (parts.empty()) return tape_->constant(Tensor::zeros(nodes.size(), d));
  Var source = parts.size() == 1 ? parts[0] : concat_rows(parts);
  return gather_rows(source, index);
}

double MemoryView::last_update(NodeId node) const {
  if (auto it = updated_row_.find(node); it != updated_row_.end())
    return update_->times[it->second];
  return memory_->last_update(node);
}

}  // namespace ctgn
