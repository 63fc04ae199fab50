#include "ctgn/train/toy.hpp"

#include <random>

namespace ctgn {

EventStore toy_graph(std::size_t nodes, std::size_t events, std::uint64_t seed,
                     std::size_t edge_dim, bool has_duration) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(nodes - 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Event> out;
  double t = 0.0;
  for (std::size_t i = 0; i < events; ++i) {
    Event e;
    e.src = pick(rng);
    do e.dst = pick(rng);
    while (e.dst == e.src);
    t += 0.5 + unit(rng);
    e.t = t;
    e.duration = has_duration ? 0.2 + 2.0 * unit(rng) : 0.0;
    for (std::size_t k = 0; k < edge_dim; ++k) e.edge_feat.push_back(unit(rng) - 0.5);
    out.push_back(std::move(e));
  }
  return EventStore(std::move(out), has_duration, nodes);
}

TrainConfig toy_config() {
  TrainConfig c;
  c.batch_size = 5;
  c.dim = 4;
  c.time_dim = 3;
  c.heads = 2;
  c.layers = 1;
  c.neighbors = 3;
  c.ode_hidden = 5;
  c.solver.steps = 4;
  c.alpha = 0.7;
  c.lr = 1e-3;
  c.split.unseen_fraction = 0.0;
  return c;
}

}  // namespace ctgn
