#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ctgn {

using NodeId = std::uint32_t;

// One timestamped interaction. `duration` is 0 for contact-sequence data.
struct Event {
  NodeId src = 0;
  NodeId dst = 0;
  double t = 0.0;
  double duration = 0.0;
  std::vector<double> edge_feat;
  std::optional<int> label;

  friend bool operator==(const Event&, const Event&) = default;
};

// Immutable, time-sorted event stream with a per-node chronological
// adjacency index. Ties in t keep input order.
class EventStore {
 public:
  EventStore() = default;
  // Sorts (stable) and validates. `num_nodes` may exceed max id + 1 so that
  // slices of one dataset share a node id space.
  EventStore(std::vector<Event> events, bool has_duration, std::size_t num_nodes = 0);

  std::span<const Event> events() const { return events_; }
  const Event& operator[](std::size_t i) const { return events_[i]; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t edge_dim() const { return edge_dim_; }
  bool has_duration() const { return has_duration_; }

  // Event indices touching `node`, in chronological order.
  std::span<const std::uint32_t> adjacency(NodeId node) const;

  EventStore slice(std::size_t begin, std::size_t end) const;
  EventStore filter(const std::function<bool(const Event&)>& keep) const;

  // Sorted distinct destination ids.
  std::vector<NodeId> destinations() const;
  // Sorted distinct ids appearing as either endpoint.
  std::vector<NodeId> active_nodes() const;

  // Rebuilds the adjacency index from the event list and compares.
  bool verify_adjacency() const;

 private:
  static std::vector<std::vector<std::uint32_t>> build_adjacency(std::span<const Event> events,
                                                                 std::size_t num_nodes);

  std::vector<Event> events_;
  std::vector<std::vector<std::uint32_t>> adjacency_;
  std::size_t num_nodes_ = 0;
  std::size_t edge_dim_ = 0;
  bool has_duration_ = false;
};

// CSV layout: header `src,dst,t[,duration],label,feat_0..feat_k`. JODIE-style
// aliases (user_id, item_id, timestamp, state_label) are accepted, and
// fields beyond the header are read as further features.
struct CsvFormat {
  // Overrides header detection of the duration column when set.
  std::optional<bool> has_duration;
  // Offset destination ids by max(src) + 1 (user/item graphs whose item ids
  // restart at 0).
  bool bipartite = false;
  // Keep only the first N rows in file order (0 = all).
  std::size_t max_events = 0;
};

EventStore parse_events(const std::filesystem::path& path, const CsvFormat& format = {});
void write_events(const std::filesystem::path& path, const EventStore& store);

}  // namespace ctgn
