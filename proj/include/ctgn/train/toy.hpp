#pragma once

#include <cstdint>

#include "ctgn/graph/event_store.hpp"
#include "ctgn/train/config.hpp"

namespace ctgn {

// Small random event stream: distinct, increasing times, random durations
// and edge features, no self-loops.
EventStore toy_graph(std::size_t nodes, std::size_t events, std::uint64_t seed,
                     std::size_t edge_dim = 2, bool has_duration = true);

// Tiny dimensions for gradient checks and exactness tests.
TrainConfig toy_config();

}  // namespace ctgn
