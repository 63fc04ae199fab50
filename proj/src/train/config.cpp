#include "ctgn/train/config.hpp"

#include <fstream>
#include <set>

#include "ctgn/errors.hpp"

namespace ctgn {

using nlohmann::json;

double TrainConfig::resolved_lr(bool event_based) const {
  return lr.value_or(event_based ? kLrEventBased : kLrContact);
}

double TrainConfig::resolved_alpha(bool event_based) const {
  return alpha.value_or(event_based ? kAlphaEventBased : kAlphaContact);
}

void TrainConfig::validate() const {
  const auto need = [](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw DataError("config key '" + key + "': " + what);
  };
  need(batch_size >= 1, "batch_size", "must be positive");
  need(dim >= 1, "dim", "must be positive");
  need(time_dim >= 1, "time_dim", "must be positive");
  need(heads >= 1 && dim % heads == 0, "heads", "must divide dim");
  need(layers >= 1, "layers", "must be positive");
  need(neighbors >= 1, "neighbors", "must be positive");
  need(ode_hidden >= 1, "ode_hidden", "must be positive");
  need(t_max > 0, "t_max", "must be positive");
  need(solver.steps >= 1, "solver.steps", "must be positive");
  need(solver.rtol > 0 && solver.atol > 0, "solver.rtol", "tolerances must be positive");
  need(!lr || *lr > 0, "lr", "must be positive");
  need(!alpha || *alpha >= 0, "alpha", "must be non-negative");
  need(patience >= 1, "patience", "must be positive");
  need(epochs >= 1, "epochs", "must be positive");
  need(dropout >= 0 && dropout < 1, "dropout", "must be in [0, 1)");
  need(cls_lr > 0, "cls_lr", "must be positive");
  try {
    split.validate();
  } catch (const std::exception& e) {
    throw DataError(std::string("config key 'split': ") + e.what());
  }
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw DataError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items())
    if (!known.count(key))
      throw DataError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
}

template <typename T>
void read(const json& obj, const std::string& key, T& out, const std::string& where = "") {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError("config key '" + (where.empty() ? key : where + "." + key) +
                    "': wrong value type");
  }
}

template <typename T>
void read_opt(const json& obj, const std::string& key, std::optional<T>& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T v{};
  read(obj, key, v);
  out = v;
}

SyntheticConfig synthetic_from_json(const json& s) {
  reject_unknown(s,
                 {"seed", "users", "items", "events", "noise", "clusters", "p_preferred",
                  "short_mean", "long_mean", "spread", "mean_interarrival", "shared_decoy"},
                 "synthetic");
  SyntheticConfig c;
  read(s, "seed", c.seed, "synthetic");
  read(s, "users", c.n_users, "synthetic");
  read(s, "items", c.n_items, "synthetic");
  read(s, "events", c.n_events, "synthetic");
  read(s, "noise", c.noise, "synthetic");
  read(s, "clusters", c.n_clusters, "synthetic");
  read(s, "p_preferred", c.p_preferred, "synthetic");
  read(s, "short_mean", c.short_mean, "synthetic");
  read(s, "long_mean", c.long_mean, "synthetic");
  read(s, "spread", c.spread, "synthetic");
  read(s, "mean_interarrival", c.mean_interarrival, "synthetic");
  read(s, "shared_decoy", c.shared_decoy, "synthetic");
  return c;
}

json synthetic_to_json(const SyntheticConfig& c) {
  return {{"seed", c.seed},          {"users", c.n_users},
          {"items", c.n_items},      {"events", c.n_events},
          {"noise", c.noise},        {"clusters", c.n_clusters},
          {"p_preferred", c.p_preferred}, {"short_mean", c.short_mean},
          {"long_mean", c.long_mean}, {"spread", c.spread},
          {"mean_interarrival", c.mean_interarrival}, {"shared_decoy", c.shared_decoy}};
}

}  // namespace

TrainConfig config_from_json(const json& doc) {
  reject_unknown(doc,
                 {"data", "has_duration", "bipartite", "max_events", "synthetic", "output_dir",
                  "batch_size", "dim", "time_dim", "heads", "layers", "neighbors", "ode_hidden",
                  "t_max", "solver", "lr", "alpha", "patience", "epochs", "seed",
                  "duration_blind", "split", "node_classification", "cotrain", "cls_hidden",
                  "dropout", "cls_epochs", "cls_lr"},
                 "");
  TrainConfig c;
  read(doc, "data", c.data);
  read_opt(doc, "has_duration", c.has_duration);
  read(doc, "bipartite", c.bipartite);
  read(doc, "max_events", c.max_events);
  if (doc.contains("synthetic") && !doc.at("synthetic").is_null())
    c.synthetic = synthetic_from_json(doc.at("synthetic"));
  read(doc, "output_dir", c.output_dir);
  read(doc, "batch_size", c.batch_size);
  read(doc, "dim", c.dim);
  read(doc, "time_dim", c.time_dim);
  read(doc, "heads", c.heads);
  read(doc, "layers", c.layers);
  read(doc, "neighbors", c.neighbors);
  read(doc, "ode_hidden", c.ode_hidden);
  read(doc, "t_max", c.t_max);
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    reject_unknown(s, {"method", "steps", "rtol", "atol", "max_steps"}, "solver");
    std::string method = to_string(c.solver.method);
    read(s, "method", method, "solver");
    c.solver.method = parse_solver_method(method);
    read(s, "steps", c.solver.steps, "solver");
    read(s, "rtol", c.solver.rtol, "solver");
    read(s, "atol", c.solver.atol, "solver");
    read(s, "max_steps", c.solver.max_steps, "solver");
  }
  read_opt(doc, "lr", c.lr);
  read_opt(doc, "alpha", c.alpha);
  read(doc, "patience", c.patience);
  read(doc, "epochs", c.epochs);
  read(doc, "seed", c.seed);
  read(doc, "duration_blind", c.duration_blind);
  if (doc.contains("split")) {
    const json& s = doc.at("split");
    reject_unknown(s, {"train", "val", "test", "unseen_fraction"}, "split");
    read(s, "train", c.split.train, "split");
    read(s, "val", c.split.val, "split");
    read(s, "test", c.split.test, "split");
    read(s, "unseen_fraction", c.split.unseen_fraction, "split");
  }
  read(doc, "node_classification", c.node_classification);
  read(doc, "cotrain", c.cotrain);
  read(doc, "cls_hidden", c.cls_hidden);
  read(doc, "dropout", c.dropout);
  read(doc, "cls_epochs", c.cls_epochs);
  read(doc, "cls_lr", c.cls_lr);
  return c;
}

json config_to_json(const TrainConfig& c) {
  json doc = {
      {"data", c.data},
      {"has_duration", c.has_duration ? json(*c.has_duration) : json(nullptr)},
      {"bipartite", c.bipartite},
      {"max_events", c.max_events},
      {"synthetic", c.synthetic ? synthetic_to_json(*c.synthetic) : json(nullptr)},
      {"output_dir", c.output_dir},
      {"batch_size", c.batch_size},
      {"dim", c.dim},
      {"time_dim", c.time_dim},
      {"heads", c.heads},
      {"layers", c.layers},
      {"neighbors", c.neighbors},
      {"ode_hidden", c.ode_hidden},
      {"t_max", c.t_max},
      {"solver",
       {{"method", to_string(c.solver.method)},
        {"steps", c.solver.steps},
        {"rtol", c.solver.rtol},
        {"atol", c.solver.atol},
        {"max_steps", c.solver.max_steps}}},
      {"lr", c.lr ? json(*c.lr) : json(nullptr)},
      {"alpha", c.alpha ? json(*c.alpha) : json(nullptr)},
      {"patience", c.patience},
      {"epochs", c.epochs},
      {"seed", c.seed},
      {"duration_blind", c.duration_blind},
      {"split",
       {{"train", c.split.train},
        {"val", c.split.val},
        {"test", c.split.test},
        {"unseen_fraction", c.split.unseen_fraction}}},
      {"node_classification", c.node_classification},
      {"cotrain", c.cotrain},
      {"cls_hidden", c.cls_hidden},
      {"dropout", c.dropout},
      {"cls_epochs", c.cls_epochs},
      {"cls_lr", c.cls_lr},
  };
  return doc;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("config " + path.string() + ": " + e.what());
  }
  TrainConfig c = config_from_json(doc);
  c.validate();
  return c;
}

}  // namespace ctgn
