#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "ctgn/graph/split.hpp"
#include "ctgn/graph/synthetic.hpp"
#include "ctgn/ode.hpp"
#include "json.hpp"

namespace ctgn {

inline constexpr double kLrContact = 1e-4;
inline constexpr double kLrEventBased = 9e-5;
inline constexpr double kAlphaContact = 0.002;
inline constexpr double kAlphaEventBased = 0.7;

struct TrainConfig {
  // Data: a CSV path, or a synthetic generator block when `data` is empty.
  std::string data;
  std::optional<bool> has_duration;
  bool bipartite = false;
  std::size_t max_events = 0;
  std::optional<SyntheticConfig> synthetic;
  std::string output_dir = "ctgn_out";

  std::size_t batch_size = 200;
  std::size_t dim = 172;
  std::size_t time_dim = 172;
  std::size_t heads = 2;
  std::size_t layers = 1;
  std::size_t neighbors = 10;
  std::size_t ode_hidden = 172;
  double t_max = 2.0;
  SolverConfig solver;

  // Unset: chosen by dataset kind (event-based vs contact-sequence).
  std::optional<double> lr;
  std::optional<double> alpha;
  std::size_t patience = 5;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  bool duration_blind = false;
  SplitSpec split;

  // Node classification head.
  bool node_classification = false;
  bool cotrain = false;
  std::size_t cls_hidden = 80;
  double dropout = 0.1;
  std::size_t cls_epochs = 50;
  double cls_lr = 1e-3;

  double resolved_lr(bool event_based) const;
  double resolved_alpha(bool event_based) const;
  void validate() const;
};

// Unknown keys anywhere in the document raise DataError naming the key.
TrainConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const TrainConfig& config);
TrainConfig load_config(const std::filesystem::path& path);

}  // namespace ctgn
