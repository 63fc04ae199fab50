#pragma once

#include <cstdint>
#include <vector>

#include "ctgn/graph/event_store.hpp"

namespace ctgn {

// User/item interaction stream with a planted duration signal.
//
// Items are split into clusters (item j belongs to cluster j mod
// n_clusters). Every user has a preferred cluster and a decoy cluster. Each
// event picks a uniform user, then with probability p_preferred an item of
// the preferred cluster with a long duration, else an item of the decoy
// cluster with a short duration: clicks the user was not interested in.
// Without durations both clusters look equally likely for the next event;
// the event's duration tells which one its destination comes from.
//
// With `shared_decoy` every user's decoy is cluster 0 and preferred
// clusters are drawn from the others; otherwise each user draws its own
// distinct decoy.
//
// Durations: class_mean * (1 + spread * U(-1, 1) + noise * N(0, 1)),
// clamped at 0. Edge features are the one-hot cluster of the item.
// Users take ids [0, n_users), items [n_users, n_users + n_items).
struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::size_t n_users = 2000;
  std::size_t n_items = 200;
  std::size_t n_events = 50000;
  double noise = 0.1;

  std::size_t n_clusters = 5;
  double p_preferred = 0.5;
  double short_mean = 60.0;
  double long_mean = 600.0;
  double spread = 0.25;
  double mean_interarrival = 1.0;
  bool shared_decoy = true;

  double duration_gap() const { return long_mean - short_mean; }
};

struct SyntheticData {
  EventStore store;
  std::vector<bool> preferred;          // per event, aligned with store order
  std::vector<std::size_t> user_preferred;
  std::vector<std::size_t> user_decoy;
};

SyntheticData generate_synthetic(const SyntheticConfig& config);

}  // namespace ctgn
