#include "ctgn/graph/neighbors.hpp"

#include <algorithm>

#include "ctgn/errors.hpp"

namespace ctgn {

std::vector<Neighbor> sample_neighbors(const EventStore& store, NodeId node, double t,
                                       std::size_t n) {
  CTGN_REQUIRE(t >= 0, "sample_neighbors: query time must be non-negative");
  const auto adj = store.adjacency(node);
  // First event at or after t; everything before it is strictly earlier.
  const auto cut = std::lower_bound(adj.begin(), adj.end(), t,
                                    [&](std::uint32_t idx, double q) { return store[idx].t < q; });
  const auto available = static_cast<std::size_t>(cut - adj.begin());
  const auto take = std::min(n, available);
  std::vector<Neighbor> out;
  out.reserve(take);
  for (auto it = cut - static_cast<std::ptrdiff_t>(take); it != cut; ++it) {
    const Event& e = store[*it];
    out.push_back({e.src == node ? e.dst : e.src, e.t, *it, e.edge_feat});
  }
  return out;
}

std::vector<std::span<const Event>> iterate_batches(const EventStore& store,
                                                    std::size_t batch_size) {
  CTGN_REQUIRE(batch_size >= 1, "iterate_batches: batch size must be at least 1");
  std::vector<std::span<const Event>> out;
  const auto all = store.events();
  for (std::size_t begin = 0; begin < all.size(); begin += batch_size)
    out.push_back(all.subspan(begin, std::min(batch_size, all.size() - begin)));
  return out;
}

}  // namespace ctgn
