#pragma once

#include <random>
#include <string>
#include <vector>

#include "ctgn/diff/params.hpp"

namespace ctgn {

// LSTM run over the two-step sequence [z_src, z_dst] from a zero state,
// then a linear readout of the final hidden state to one logit.
struct LinkDecoder {
  std::string prefix = "link";
  std::size_t dim = 172;
  std::size_t hidden = 172;

  void add_params(ParamSet& params, std::mt19937_64& rng) const;
  // B x 1 logits for B pairs of rows.
  Var logits(const ParamVars& p, Var z_src, Var z_dst) const;
  // sigmoid(logits), eager.
  std::vector<double> score(const ParamSet& params, const Tensor& z_src, const Tensor& z_dst) const;
};

// MLP dim -> hidden -> classes with ReLU and inverted dropout on the hidden
// layer (training only).
struct NodeClassifier {
  std::string prefix = "cls";
  std::size_t dim = 172;
  std::size_t hidden = 80;
  std::size_t classes = 2;
  double dropout = 0.1;

  void add_params(ParamSet& params, std::mt19937_64& rng) const;
  // `rng` set means training mode.
  Var logits(const ParamVars& p, Var z, std::mt19937_64* rng = nullptr) const;
  // Row-wise softmax probabilities, eager and dropout-free.
  Tensor classify(const ParamSet& params, const Tensor& z) const;
};

}  // namespace ctgn
