#pragma once

#include <algorithm>
#include <cstring>
#include <span>
#include <vector>

#include "ctgn/train/trainer.hpp"

namespace ctgn::testing {

// Interleaved (src, dst, negative) embeddings of every event of `store`,
// replayed from fresh memory with frozen parameters.
inline std::vector<Tensor> replay_embeddings(const Model& model, const ParamSet& params,
                                             const EventStore& store,
                                             std::span<const NodeId> candidates,
                                             std::uint64_t seed) {
  std::vector<Tensor> rows;
  MemoryState memory = model.fresh_memory();
  replay(model, params, memory, store, store.events(), candidates, seed, SplitName::kTrain, 0,
         false, [&](std::size_t, std::span<const Event> batch, const BatchForward& out) {
           const Tensor& z = out.z.value();
           for (std::size_t i = 0; i < 3 * batch.size(); ++i) {
             Tensor r = Tensor::zeros(1, z.cols());
             std::copy(z.row_span(i).begin(), z.row_span(i).end(), r.data().begin());
             rows.push_back(std::move(r));
           }
         });
  return rows;
}

struct TruncationResult {
  std::size_t compared = 0;
  std::size_t mismatched = 0;
};

// Cuts the stream after time `cut` and compares every embedding computed at
// times <= cut against the uncut replay, bit for bit.
inline TruncationResult truncation_check(const Model& model, const ParamSet& params,
                                         const EventStore& store, double cut,
                                         std::uint64_t seed) {
  const std::vector<NodeId> candidates = store.destinations();
  const auto full = replay_embeddings(model, params, store, candidates, seed);
  const EventStore kept = store.filter([&](const Event& e) { return e.t <= cut; });
  TruncationResult r;
  if (kept.empty()) return r;
  const auto part = replay_embeddings(model, params, kept, candidates, seed);
  for (std::size_t i = 0; i < part.size(); ++i) {
    ++r.compared;
    const auto a = part[i].data(), b = full[i].data();
    if (a.size() != b.size() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0)
      ++r.mismatched;
  }
  return r;
}

}  // namespace ctgn::testing
