#include "ctgn/diff/layers.hpp"

namespace ctgn::nn {

using namespace ctgn::ops;

Var zeros(Tape& tape, std::size_t rows, std::size_t cols) {
  return tape.constant(Tensor::zeros(rows, cols));
}

void add_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                std::mt19937_64& rng, bool bias) {
  params.add(prefix + "/w", uniform_fan_in(in, out, rng));
  if (bias) params.add(prefix + "/b", Tensor::zeros(1, out));
}

Var linear(const ParamVars& p, const std::string& prefix, Var x, bool bias) {
  Var y = matmul(x, p[prefix + "/w"]);
  return bias ? add_bias(y, p[prefix + "/b"]) : y;
}

void add_gru(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t hidden,
             std::mt19937_64& rng) {
  params.add(prefix + "/w_in", uniform_fan_in(in, 3 * hidden, rng));
  params.add(prefix + "/w_hid", uniform_fan_in(hidden, 3 * hidden, rng));
  params.add(prefix + "/b_in", Tensor::zeros(1, 3 * hidden));
  params.add(prefix + "/b_hid", Tensor::zeros(1, 3 * hidden));
}

Var gru_cell(const ParamVars& p, const std::string& prefix, Var x, Var h) {
  const std::size_t d = h.cols();
  Var gx = add_bias(matmul(x, p[prefix + "/w_in"]), p[prefix + "/b_in"]);
  Var gh = add_bias(matmul(h, p[prefix + "/w_hid"]), p[prefix + "/b_hid"]);
  Var r = sigmoid(slice_cols(gx, 0, d) + slice_cols(gh, 0, d));
  Var u = sigmoid(slice_cols(gx, d, d) + slice_cols(gh, d, d));
  Var n = tanh(slice_cols(gx, 2 * d, d) + r * slice_cols(gh, 2 * d, d));
  // (1 - u) * n + u * h  ==  n + u * (h - n)
  return n + u * (h - n);
}

void add_lstm(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t hidden,
              std::mt19937_64& rng) {
  params.add(prefix + "/w_in", uniform_fan_in(in, 4 * hidden, rng));
  params.add(prefix + "/w_hid", uniform_fan_in(hidden, 4 * hidden, rng));
  params.add(prefix + "/b", Tensor::zeros(1, 4 * hidden));
}

LstmState lstm_cell(const ParamVars& p, const std::string& prefix, Var x, LstmState state) {
  const std::size_t d = state.h.cols();
  Var gates = add_bias(matmul(x, p[prefix + "/w_in"]) + matmul(state.h, p[prefix + "/w_hid"]),
                       p[prefix + "/b"]);
  Var i = sigmoid(slice_cols(gates, 0, d));
  Var f = sigmoid(slice_cols(gates, d, d));
  Var g = tanh(slice_cols(gates, 2 * d, d));
  Var o = sigmoid(slice_cols(gates, 3 * d, d));
  Var c = f * state.c + i * g;
  return {o * tanh(c), c};
}

}  // namespace ctgn::nn
