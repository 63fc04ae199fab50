#pragma once

#include <span>
#include <vector>

#include "ctgn/graph/event_store.hpp"

namespace ctgn {

struct Neighbor {
  NodeId node = 0;
  double t = 0.0;
  std::uint32_t event = 0;  // index into the store the neighbor came from
  std::span<const double> edge_feat;
};

// The n most recent events touching `node` with time strictly before t,
// oldest first.
std::vector<Neighbor> sample_neighbors(const EventStore& store, NodeId node, double t,
                                       std::size_t n);

// Consecutive chronological chunks; the last one may be short.
std::vector<std::span<const Event>> iterate_batches(const EventStore& store,
                                                    std::size_t batch_size = 200);

}  // namespace ctgn
