#pragma once

#include <vector>

#include "ctgn/train/trainer.hpp"

namespace ctgn {

// Source-node embeddings at every labelled event, from a frozen-parameter
// replay of the whole stream.
struct LabeledEmbeddings {
  Tensor z;  // n x dim
  std::vector<int> labels;
  std::vector<SplitName> split;
  std::size_t count(SplitName s) const;
};

LabeledEmbeddings source_embeddings(const Experiment& ex, const ParamSet& encoder_params);

struct NodeClassResult {
  std::vector<double> val_auc;  // per epoch
  std::size_t best_epoch = 0;
  double best_val_auc = 0.0;
  double test_auc = 0.0;
  ParamSet params;
};

// MLP head on frozen embeddings, early-stopped on validation AUC.
NodeClassResult train_node_classifier(const Experiment& ex, const LabeledEmbeddings& data);

}  // namespace ctgn
