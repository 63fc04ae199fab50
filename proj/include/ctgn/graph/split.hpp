#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ctgn/graph/event_store.hpp"

namespace ctgn {

struct SplitSpec {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
  double unseen_fraction = 0.10;

  void validate() const;
};

// Index boundaries over the time-sorted event list:
// train = [0, train_end), val = [train_end, val_end), test = [val_end, total).
struct ChronoSplit {
  std::size_t train_end = 0;
  std::size_t val_end = 0;
  std::size_t total = 0;

  std::size_t train_size() const { return train_end; }
  std::size_t val_size() const { return val_end - train_end; }
  std::size_t test_size() const { return total - val_end; }
};

ChronoSplit chronological_split(const EventStore& store, const SplitSpec& spec = {});

struct InductiveMask {
  std::vector<NodeId> seen;    // sorted
  std::vector<NodeId> unseen;  // sorted
  EventStore train;            // train split without any event touching an unseen node
  std::vector<bool> val_inductive;   // per val event: touches an unseen node
  std::vector<bool> test_inductive;  // per test event

  bool is_unseen(NodeId node) const;
};

// Withholds floor(fraction * |active nodes|) uniformly sampled nodes from
// training. fraction = 0 yields an empty unseen set.
InductiveMask mask_unseen_nodes(const EventStore& store, const ChronoSplit& split,
                                double fraction, std::uint64_t seed);

// Text manifest: event index ranges per split and the unseen node set.
void write_split_manifest(const std::filesystem::path& path, const ChronoSplit& split,
                          const InductiveMask& mask);

}  // namespace ctgn
