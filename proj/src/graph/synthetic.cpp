#include "ctgn/graph/synthetic.hpp"

#include <algorithm>
#include <random>

#include "ctgn/errors.hpp"

namespace ctgn {

SyntheticData generate_synthetic(const SyntheticConfig& c) {
  CTGN_REQUIRE(c.n_users >= 2 && c.n_items >= 2, "synthetic: need at least 2 users and 2 items");
  CTGN_REQUIRE(c.n_clusters >= 2 && c.n_items >= c.n_clusters,
          "synthetic: need at least 2 clusters and one item per cluster");
  CTGN_REQUIRE(c.n_events >= 1, "synthetic: need at least one event");
  CTGN_REQUIRE(c.noise >= 0 && c.spread >= 0 && c.spread < 1, "synthetic: bad noise/spread");
  CTGN_REQUIRE(c.p_preferred >= 0 && c.p_preferred <= 1, "synthetic: p_preferred outside [0,1]");

  std::mt19937_64 rng(c.seed);
  std::uniform_int_distribution<std::size_t> pick_cluster(0, c.n_clusters - 1);
  std::uniform_int_distribution<std::size_t> pick_other(1, c.n_clusters - 1);
  std::uniform_int_distribution<std::size_t> pick_user(0, c.n_users - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::exponential_distribution<double> gap(1.0 / c.mean_interarrival);

  SyntheticData out;
  out.user_preferred.resize(c.n_users);
  out.user_decoy.resize(c.n_users);
  for (std::size_t u = 0; u < c.n_users; ++u) {
    if (c.shared_decoy) {
      out.user_preferred[u] = pick_other(rng);
      out.user_decoy[u] = 0;
    } else {
      out.user_preferred[u] = pick_cluster(rng);
      out.user_decoy[u] = (out.user_preferred[u] + pick_other(rng)) % c.n_clusters;
    }
  }
  // items of cluster k: k, k + K, k + 2K, ...
  const auto cluster_size = [&](std::size_t k) {
    return (c.n_items - k + c.n_clusters - 1) / c.n_clusters;
  };

  std::vector<Event> events;
  events.reserve(c.n_events);
  out.preferred.reserve(c.n_events);
  double t = 0.0;
  for (std::size_t i = 0; i < c.n_events; ++i) {
    t += gap(rng);
    const std::size_t u = pick_user(rng);
    const bool preferred = unit(rng) < c.p_preferred;
    const std::size_t cluster = preferred ? out.user_preferred[u] : out.user_decoy[u];
    std::uniform_int_distribution<std::size_t> pick_member(0, cluster_size(cluster) - 1);
    const std::size_t item = cluster + c.n_clusters * pick_member(rng);
    const double mean = preferred ? c.long_mean : c.short_mean;
    const double duration =
        std::max(0.0, mean * (1.0 + c.spread * sym(rng) + c.noise * gauss(rng)));

    Event e;
    e.src = static_cast<NodeId>(u);
    e.dst = static_cast<NodeId>(c.n_users + item);
    e.t = t;
    e.duration = duration;
    e.edge_feat.assign(c.n_clusters, 0.0);
    e.edge_feat[cluster] = 1.0;
    e.label = 0;
    events.push_back(std::move(e));
    out.preferred.push_back(preferred);
  }
  out.store = EventStore(std::move(events), true, c.n_users + c.n_items);
  return out;
}

}  // namespace ctgn
