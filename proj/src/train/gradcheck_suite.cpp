#include "ctgn/train/gradcheck_suite.hpp"

#include <random>

#include "ctgn/attention.hpp"
#include "ctgn/decoders.hpp"
#include "ctgn/diff/layers.hpp"
#include "ctgn/errors.hpp"
#include "ctgn/graph/neighbors.hpp"
#include "ctgn/memory.hpp"
#include "ctgn/ode.hpp"
#include "ctgn/seed.hpp"
#include "ctgn/time_codec.hpp"
#include "ctgn/train/metrics.hpp"
#include "ctgn/train/model.hpp"
#include "ctgn/train/toy.hpp"

namespace ctgn {

using namespace ctgn::ops;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Tensor t = Tensor::zeros(r, c);
  for (auto& x : t.data()) x = g(rng);
  return t;
}

GradCheckReport check_diffcore(const GradCheckOptions& o) {
  std::mt19937_64 rng(11);
  ParamSet ps;
  ps.add("a", random_tensor(4, 3, rng));
  ps.add("b", random_tensor(3, 5, rng));
  ps.add("bias", random_tensor(1, 5, rng));
  ps.add("col", random_tensor(4, 1, rng));
  const Tensor x = random_tensor(4, 5, rng);
  const std::vector<double> labels{1, 0, 1, 0};
  const std::vector<std::size_t> classes{0, 2, 4, 1};
  const std::vector<std::ptrdiff_t> pick{2, 0, -1, 2, 1};
  const LossFn loss = [&](Tape& t, const ParamVars& p) {
    Var h = add_bias(matmul(p["a"], p["b"]), p["bias"]);
    Var y = tanh(h) * sigmoid(t.constant(x) + h);
    y = scale_rows(y, p["col"]);
    Var pos = add_scalar(square(y), 0.5);
    Var z = sqrt(pos) + log(pos) + exp(scale(y, 0.3)) + relu(add_scalar(y, 0.05)) + cos(y);
    const std::vector<Var> cat{slice_cols(z, 1, 3), neg(slice_cols(h, 0, 2))};
    Var w = gather_rows(concat_cols(cat), pick);
    const std::vector<Var> rows{w, slice_rows(z, 0, 2)};
    Var r = concat_rows(rows);
    Var sm = softmax_rows(r);
    return sum(row_norm(r, 1e-12)) + mean(sm * r) +
           bce_with_logits(slice_cols(h, 0, 1), labels) + softmax_cross_entropy(z, classes);
  };
  return grad_check(loss, ps, o);
}

GradCheckReport check_time_codec(const GradCheckOptions& o) {
  std::mt19937_64 rng(12);
  ParamSet ps;
  ps.add("time/omega", random_tensor(1, 6, rng));
  ps.add("time/phase", random_tensor(1, 6, rng));
  const std::vector<double> deltas{0.0, 0.3, 1.2, 2.5};
  const std::vector<double> stamps{0.5, 1.0, 1.7, 3.0};
  const Tensor w = random_tensor(4, 6, rng);
  const LossFn loss = [&](Tape& t, const ParamVars& p) {
    Var e = encode_time(p, "time", deltas);
    return sum(e * t.constant(w)) + smoothness_loss(encode_time(p, "time", stamps));
  };
  return grad_check(loss, ps, o);
}

GradCheckReport check_memory(const GradCheckOptions& o) {
  std::mt19937_64 rng(13);
  MemoryConfig mc;
  mc.dim = 4;
  mc.edge_dim = 2;
  const MemoryModule module(mc);
  ParamSet ps;
  add_time_encoder(ps, "time", 3);
  module.add_params(ps, rng);
  MemoryState mem(5, 4);
  std::normal_distribution<double> g(0.0, 0.5);
  for (NodeId n = 0; n < 5; ++n) {
    std::vector<double> row(4);
    for (auto& v : row) v = g(rng);
    mem.write(n, row, 0.5);
  }
  const EventStore store = toy_graph(5, 6, 3, 2, true);
  const MessageMap messages = module.compute_messages(store.events(), mem);
  const Tensor w = random_tensor(messages.size(), 4, rng);
  const LossFn loss = [&](Tape& t, const ParamVars& p) {
    return sum(module.update(p, mem, messages).values * t.constant(w));
  };
  return grad_check(loss, ps, o);
}

GradCheckReport check_attention(const GradCheckOptions& o) {
  std::mt19937_64 rng(14);
  const EventStore store = toy_graph(5, 12, 4, 2, true);
  AttentionConfig ac;
  ac.embed_dim = 4;
  ac.attn_dim = 4;
  ac.edge_dim = 2;
  ac.heads = 2;
  ac.layers = 2;
  ac.neighbors = 3;
  const TemporalEncoder enc(ac);
  ParamSet ps;
  add_time_encoder(ps, "time", 3);
  enc.add_params(ps, rng);
  MemoryState mem(5, 4);
  std::normal_distribution<double> g(0.0, 0.5);
  for (NodeId n = 0; n < 5; ++n) {
    std::vector<double> row(4);
    for (auto& v : row) v = g(rng);
    mem.write(n, row, 0.1);
  }
  std::vector<NodeQuery> queries;
  for (NodeId n = 0; n < 5; ++n) queries.push_back({n, store.events().back().t + 0.5});
  queries.push_back({2, store[6].t});
  const Tensor w = random_tensor(queries.size(), 4, rng);
  const LossFn loss = [&](Tape& t, const ParamVars& p) {
    const MemoryView view(t, mem, nullptr);
    return sum(enc.encode(p, view, store, queries) * t.constant(w));
  };
  return grad_check(loss, ps, o);
}

GradCheckReport check_ode(const GradCheckOptions& o) {
  std::mt19937_64 rng(15);
  const OdeFunc func{"ode", 3, 5};
  ParamSet ps;
  func.add_params(ps, rng);
  ps.add("z0", random_tensor(3, 3, rng));
  const std::vector<double> horizon{0.0, 0.7, 1.9};
  const Tensor w = random_tensor(3, 3, rng);
  SolverConfig sc;
  sc.steps = 6;
  const LossFn loss = [&](Tape& t, const ParamVars& p) {
    return sum(ode_solve(t, func.bind(p), p["z0"], horizon, sc) * t.constant(w));
  };
  return grad_check(loss, ps, o);
}

GradCheckReport check_decoders(const GradCheckOptions& o) {
  std::mt19937_64 rng(16);
  const LinkDecoder link{"link", 4, 5};
  const NodeClassifier cls{"cls", 4, 6, 2, 0.1};
  ParamSet ps;
  link.add_params(ps, rng);
  cls.add_params(ps, rng);
  ps.add("zs", random_tensor(3, 4, rng));
  ps.add("zd", random_tensor(3, 4, rng));
  const std::vector<double> labels{1, 0, 1};
  const std::vector<std::size_t> classes{1, 0, 1};
  const LossFn loss = [&](Tape&, const ParamVars& p) {
    return bce_with_logits(link.logits(p, p["zs"], p["zd"]), labels) +
           softmax_cross_entropy(cls.logits(p, p["zs"]), classes);
  };
  return grad_check(loss, ps, o);
}

GradCheckReport check_broken(const GradCheckOptions& o) {
  std::mt19937_64 rng(17);
  ParamSet ps;
  ps.add("x", random_tensor(2, 3, rng));
  const LossFn loss = [](Tape&, const ParamVars& p) { return sum(square(p["x"])); };
  NamedTensors wrong = grad(loss, ps);
  // Drop the factor 2 of d(x^2)/dx.
  for (auto& v : wrong.at("x").data()) v *= 0.5;
  return grad_check(loss, ps, wrong, o);
}

}  // namespace

GradCheckReport end_to_end_gradcheck(const GradCheckOptions& options) {
  const TrainConfig cfg = toy_config();
  const EventStore store = toy_graph(6, 20, 21, 2, true);
  const ModelShape shape{store.num_nodes(), store.edge_dim(), true};
  const Model model(cfg, shape, duration_stats(store, cfg.t_max));
  const ParamSet params = model.init_params(5);
  const auto batches = iterate_batches(store, cfg.batch_size);
  const auto candidates = store.destinations();
  MemoryState memory = model.fresh_memory();
  for (std::size_t b = 0; b + 1 < batches.size(); ++b)
    model.memory_module().stage_and_apply(params, memory, batches[b]);
  const auto last = batches.back();
  const auto negs = sample_negatives(last, candidates, derive_seed(5, SeedStream::kNegatives));
  const LossFn loss = [&](Tape&, const ParamVars& p) {
    return model.loss(p, model.forward(p, memory, store, last, negs), last);
  };
  return grad_check(loss, params, options);
}

std::vector<std::string> gradcheck_modules() {
  return {"diffcore", "time_codec", "memory_store", "temporal_attention",
          "ode_core", "decoders",   "train_eval"};
}

GradCheckReport run_gradcheck(const std::string& module, const GradCheckOptions& options) {
  if (module == "diffcore") return check_diffcore(options);
  if (module == "time_codec") return check_time_codec(options);
  if (module == "memory_store") return check_memory(options);
  if (module == "temporal_attention") return check_attention(options);
  if (module == "ode_core") return check_ode(options);
  if (module == "decoders") return check_decoders(options);
  if (module == "train_eval") return end_to_end_gradcheck(options);
  if (module == kBrokenFixture) return check_broken(options);
  throw DataError("unknown gradcheck module '" + module + "'");
}

std::vector<std::string> resolve_gradcheck_selection(std::span<const std::string> selection) {
  if (selection.empty()) throw DataError("gradcheck: empty module selection");
  std::vector<std::string> out;
  const auto known = gradcheck_modules();
  for (const auto& s : selection) {
    if (s == "all") {
      out.insert(out.end(), known.begin(), known.end());
      continue;
    }
    if (s != kBrokenFixture && std::find(known.begin(), known.end(), s) == known.end())
      throw DataError("unknown gradcheck module '" + s + "'");
    out.push_back(s);
  }
  return out;
}

std::vector<ModuleCheck> run_gradchecks(std::span<const std::string> selection,
                                        const GradCheckOptions& options) {
  std::vector<ModuleCheck> out;
  for (const auto& m : resolve_gradcheck_selection(selection))
    out.push_back({m, run_gradcheck(m, options)});
  return out;
}

}  // namespace ctgn
