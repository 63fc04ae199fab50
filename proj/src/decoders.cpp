#include "ctgn/decoders.hpp"

#include "ctgn/diff/layers.hpp"
#include "ctgn/errors.hpp"

namespace ctgn {

using namespace ctgn::ops;

void LinkDecoder::add_params(ParamSet& params, std::mt19937_64& rng) const {
  nn::add_lstm(params, prefix + "/lstm", dim, hidden, rng);
  nn::add_linear(params, prefix + "/out", hidden, 1, rng);
}

Var LinkDecoder::logits(const ParamVars& p, Var z_src, Var z_dst) const {
  CTGN_REQUIRE(z_src.cols() == dim && z_dst.cols() == dim,
          "link decoder: embeddings must have width " + std::to_string(dim));
  CTGN_REQUIRE(z_src.rows() == z_dst.rows(), "link decoder: source and destination counts differ");
  const std::size_t b = z_src.rows();
  nn::LstmState st{nn::zeros(p.tape(), b, hidden), nn::zeros(p.tape(), b, hidden)};
  st = nn::lstm_cell(p, prefix + "/lstm", z_src, st);
  st = nn::lstm_cell(p, prefix + "/lstm", z_dst, st);
  return nn::linear(p, prefix + "/out", st.h);
}

std::vector<double> LinkDecoder::score(const ParamSet& params, const Tensor& z_src,
                                       const Tensor& z_dst) const {
  Tape tape;
  ParamVars p(tape, params, false);
  Var s = sigmoid(logits(p, tape.constant(z_src), tape.constant(z_dst)));
  const auto v = s.value().data();
  return {v.begin(), v.end()};
}

void NodeClassifier::add_params(ParamSet& params, std::mt19937_64& rng) const {
  CTGN_REQUIRE(classes >= 2, "node classifier needs at least two classes");
  CTGN_REQUIRE(dropout >= 0.0 && dropout < 1.0, "dropout rate must be in [0, 1)");
  nn::add_linear(params, prefix + "/l1", dim, hidden, rng);
  nn::add_linear(params, prefix + "/l2", hidden, classes, rng);
}

Var NodeClassifier::logits(const ParamVars& p, Var z, std::mt19937_64* rng) const {
  Var x = relu(nn::linear(p, prefix + "/l1", z));
  if (rng && dropout > 0.0) {
    std::bernoulli_distribution keep(1.0 - dropout);
    Tensor mask = Tensor::zeros(x.rows(), x.cols());
    for (auto& m : mask.data()) m = keep(*rng) ? 1.0 / (1.0 - dropout) : 0.0;
    x = mul(x, p.tape().constant(std::move(mask)));
  }
  return nn::linear(p, prefix + "/l2", x);
}

Tensor NodeClassifier::classify(const ParamSet& params, const Tensor& z) const {
  Tape tape;
  ParamVars p(tape, params, false);
  return softmax_rows(logits(p, tape.constant(z))).value();
}

}  // namespace ctgn
