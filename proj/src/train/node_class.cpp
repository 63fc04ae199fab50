#include "ctgn/train/node_class.hpp"

#include <algorithm>

#include "ctgn/diff/ops.hpp"
#include "ctgn/errors.hpp"
#include "ctgn/seed.hpp"
#include "ctgn/train/metrics.hpp"

namespace ctgn {

using namespace ctgn::ops;

std::size_t LabeledEmbeddings::count(SplitName s) const {
  return static_cast<std::size_t>(std::count(split.begin(), split.end(), s));
}

LabeledEmbeddings source_embeddings(const Experiment& ex, const ParamSet& encoder_params) {
  const Model model(ex.config, ex.shape(), ex.stats);
  MemoryState memory = model.fresh_memory();
  std::vector<double> rows;
  LabeledEmbeddings out;
  std::size_t offset = 0;
  const auto hook = [&](std::size_t, std::span<const Event> batch, const BatchForward& f) {
    for (std::size_t i = 0; i < batch.size(); ++i, ++offset) {
      if (!batch[i].label) continue;
      const auto z = f.z.value().row_span(3 * i);
      rows.insert(rows.end(), z.begin(), z.end());
      out.labels.push_back(*batch[i].label == 0 ? 0 : 1);
      out.split.push_back(offset < ex.split.train_end ? SplitName::kTrain
                          : offset < ex.split.val_end ? SplitName::kVal
                                                      : SplitName::kTest);
    }
  };
  replay(model, encoder_params, memory, ex.store, ex.store.events(), ex.store.destinations(),
         ex.config.seed, SplitName::kTest, 0, true, hook);
  if (out.labels.empty()) throw DataError("node classification: the dataset has no labels");
  out.z = Tensor::matrix(out.labels.size(), ex.config.dim, std::move(rows));
  return out;
}

namespace {

struct Rows {
  Tensor z;
  std::vector<int> labels;
};

Rows select(const LabeledEmbeddings& d, SplitName s) {
  Rows r;
  std::vector<double> v;
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    if (d.split[i] != s) continue;
    const auto row = d.z.row_span(i);
    v.insert(v.end(), row.begin(), row.end());
    r.labels.push_back(d.labels[i]);
  }
  if (r.labels.empty()) throw DataError("node classification: no labelled events in " + to_string(s));
  r.z = Tensor::matrix(r.labels.size(), d.z.cols(), std::move(v));
  return r;
}

double auc_of(const NodeClassifier& head, const ParamSet& params, const Rows& rows) {
  const Tensor prob = head.classify(params, rows.z);
  std::vector<double> scores(rows.labels.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = prob(i, 1);
  return roc_auc(scores, rows.labels);
}

}  // namespace

NodeClassResult train_node_classifier(const Experiment& ex, const LabeledEmbeddings& data) {
  const TrainConfig& c = ex.config;
  const NodeClassifier head{"cls", c.dim, c.cls_hidden, 2, c.dropout};
  const Rows train = select(data, SplitName::kTrain);
  const Rows val = select(data, SplitName::kVal);
  const Rows test = select(data, SplitName::kTest);

  std::mt19937_64 init(derive_seed(c.seed, SeedStream::kInit, 1));
  std::mt19937_64 dropout(derive_seed(c.seed, SeedStream::kDropout));
  NodeClassResult result;
  ParamSet params;
  head.add_params(params, init);
  OptimState opt;
  AdamConfig adam;
  adam.lr = c.cls_lr;
  EarlyStopping stopper(c.patience);
  const std::size_t n = train.labels.size(), bs = c.batch_size;
  for (std::size_t epoch = 0; epoch < c.cls_epochs; ++epoch) {
    for (std::size_t begin = 0; begin < n; begin += bs) {
      const std::size_t m = std::min(bs, n - begin);
      Tensor z = Tensor::matrix(m, c.dim, {train.z.data().begin() + static_cast<std::ptrdiff_t>(begin * c.dim),
                                           train.z.data().begin() + static_cast<std::ptrdiff_t>((begin + m) * c.dim)});
      std::vector<std::size_t> labels(train.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                                      train.labels.begin() + static_cast<std::ptrdiff_t>(begin + m));
      Tape tape;
      ParamVars p(tape, params, true);
      Var loss = softmax_cross_entropy(head.logits(p, tape.constant(std::move(z)), &dropout), labels);
      tape.backward(loss);
      adam_step(params, p.grads(), opt, adam);
    }
    const double auc = auc_of(head, params, val);
    result.val_auc.push_back(auc);
    const bool stop = stopper.observe(auc);
    if (stopper.improved()) result.params = params;
    if (stop) break;
  }
  result.best_epoch = stopper.best_epoch();
  result.best_val_auc = stopper.best_score();
  result.test_auc = auc_of(head, result.params, test);
  return result;
}

}  // namespace ctgn
