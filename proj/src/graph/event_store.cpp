#include "ctgn/graph/event_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "ctgn/errors.hpp"

namespace ctgn {

EventStore::EventStore(std::vector<Event> events, bool has_duration, std::size_t num_nodes)
    : events_(std::move(events)), has_duration_(has_duration) {
  std::stable_sort(events_.begin(), events_.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  std::size_t max_id = 0;
  edge_dim_ = events_.empty() ? 0 : events_.front().edge_feat.size();
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (!(e.t >= 0.0) || !std::isfinite(e.t))
      throw DataError("event " + std::to_string(i) + " has invalid timestamp");
    if (!(e.duration >= 0.0) || !std::isfinite(e.duration))
      throw DataError("event " + std::to_string(i) + " has invalid duration");
    if (e.edge_feat.size() != edge_dim_)
      throw DataError("event " + std::to_string(i) + " has " +
                      std::to_string(e.edge_feat.size()) + " edge features, expected " +
                      std::to_string(edge_dim_));
    max_id = std::max<std::size_t>({max_id, e.src, e.dst});
  }
  num_nodes_ = events_.empty() ? num_nodes : std::max(num_nodes, max_id + 1);
  adjacency_ = build_adjacency(events_, num_nodes_);
}

std::vector<std::vector<std::uint32_t>> EventStore::build_adjacency(std::span<const Event> events,
                                                                    std::size_t num_nodes) {
  std::vector<std::vector<std::uint32_t>> adj(num_nodes);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto idx = static_cast<std::uint32_t>(i);
    adj[events[i].src].push_back(idx);
    if (events[i].dst != events[i].src) adj[events[i].dst].push_back(idx);
  }
  return adj;
}

std::span<const std::uint32_t> EventStore::adjacency(NodeId node) const {
  if (node >= adjacency_.size()) return {};
  return adjacency_[node];
}

EventStore EventStore::slice(std::size_t begin, std::size_t end) const {
  CTGN_REQUIRE(begin <= end && end <= events_.size(), "EventStore::slice: range out of bounds");
  std::vector<Event> part(events_.begin() + static_cast<std::ptrdiff_t>(begin),
                          events_.begin() + static_cast<std::ptrdiff_t>(end));
  EventStore out(std::move(part), has_duration_, num_nodes_);
  out.edge_dim_ = edge_dim_;
  return out;
}

EventStore EventStore::filter(const std::function<bool(const Event&)>& keep) const {
  std::vector<Event> part;
  for (const Event& e : events_)
    if (keep(e)) part.push_back(e);
  EventStore out(std::move(part), has_duration_, num_nodes_);
  out.edge_dim_ = edge_dim_;
  return out;
}

std::vector<NodeId> EventStore::destinations() const {
  std::set<NodeId> ids;
  for (const Event& e : events_) ids.insert(e.dst);
  return {ids.begin(), ids.end()};
}

std::vector<NodeId> EventStore::active_nodes() const {
  std::set<NodeId> ids;
  for (const Event& e : events_) {
    ids.insert(e.src);
    ids.insert(e.dst);
  }
  return {ids.begin(), ids.end()};
}

bool EventStore::verify_adjacency() const {
  return build_adjacency(events_, num_nodes_) == adjacency_;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                     : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

struct Columns {
  int src = -1, dst = -1, t = -1, duration = -1, label = -1;
  std::vector<int> features;
};

Columns map_header(const std::vector<std::string_view>& header) {
  Columns c;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    const auto name = trim(header[static_cast<std::size_t>(i)]);
    if (name == "src" || name == "user_id" || name == "u") c.src = i;
    else if (name == "dst" || name == "item_id" || name == "i") c.dst = i;
    else if (name == "t" || name == "timestamp" || name == "ts") c.t = i;
    else if (name == "duration" || name == "dur") c.duration = i;
    else if (name == "label" || name == "state_label") c.label = i;
    else c.features.push_back(i);
  }
  if (c.src < 0 || c.dst < 0 || c.t < 0)
    throw DataError("CSV header must name src, dst and t columns");
  return c;
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

EventStore parse_events(const std::filesystem::path& path, const CsvFormat& format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open event file: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  Columns cols;
  std::size_t header_width = 0;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto header = split_fields(line);
    cols = map_header(header);
    header_width = header.size();
    have_header = true;
  }
  if (!have_header) throw DataError("no events in " + path.string());
  const bool has_duration = format.has_duration.value_or(cols.duration >= 0);
  if (has_duration && cols.duration < 0)
    throw DataError("format requests durations but the header has no duration column");

  std::vector<Event> events;
  std::size_t row_width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (format.max_events && events.size() >= format.max_events) break;
    const auto fields = split_fields(line);
    const auto fail = [&](const std::string& why) {
      throw DataError(path.filename().string() + ":" + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() < header_width) fail("expected at least " + std::to_string(header_width) +
                                           " fields, got " + std::to_string(fields.size()));
    if (row_width == 0) row_width = fields.size();
    if (fields.size() != row_width) fail("inconsistent field count");
    Event e;
    if (!parse_number(fields[static_cast<std::size_t>(cols.src)], e.src)) fail("bad src id");
    if (!parse_number(fields[static_cast<std::size_t>(cols.dst)], e.dst)) fail("bad dst id");
    if (!parse_number(fields[static_cast<std::size_t>(cols.t)], e.t) || e.t < 0 ||
        !std::isfinite(e.t))
      fail("bad timestamp");
    if (has_duration &&
        (!parse_number(fields[static_cast<std::size_t>(cols.duration)], e.duration) ||
         e.duration < 0 || !std::isfinite(e.duration)))
      fail("bad duration");
    if (cols.label >= 0) {
      const auto s = trim(fields[static_cast<std::size_t>(cols.label)]);
      if (!s.empty()) {
        double lv = 0;
        if (!parse_number(s, lv) || lv != std::floor(lv)) fail("bad label");
        e.label = static_cast<int>(lv);
      }
    }
    std::vector<std::size_t> feat_idx(cols.features.begin(), cols.features.end());
    for (std::size_t i = header_width; i < fields.size(); ++i) feat_idx.push_back(i);
    e.edge_feat.resize(feat_idx.size());
    for (std::size_t k = 0; k < feat_idx.size(); ++k)
      if (!parse_number(fields[feat_idx[k]], e.edge_feat[k]))
        fail("bad feature value in column " + std::to_string(feat_idx[k]));
    events.push_back(std::move(e));
  }
  if (events.empty()) throw DataError("no events in " + path.string());
  if (format.bipartite) {
    NodeId max_src = 0;
    for (const Event& e : events) max_src = std::max(max_src, e.src);
    for (Event& e : events) e.dst += max_src + 1;
  }
  return EventStore(std::move(events), has_duration);
}

void write_events(const std::filesystem::path& path, const EventStore& store) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  std::string header = store.has_duration() ? "src,dst,t,duration,label" : "src,dst,t,label";
  for (std::size_t k = 0; k < store.edge_dim(); ++k) header += ",feat_" + std::to_string(k);
  out << header << '\n';
  std::string row;
  for (const Event& e : store.events()) {
    row.clear();
    row += std::to_string(e.src);
    row += ',';
    row += std::to_string(e.dst);
    row += ',';
    append_double(row, e.t);
    if (store.has_duration()) {
      row += ',';
      append_double(row, e.duration);
    }
    row += ',';
    if (e.label) row += std::to_string(*e.label);
    for (double f : e.edge_feat) {
      row += ',';
      append_double(row, f);
    }
    out << row << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace ctgn
