#pragma once

#include <random>
#include <string>

#include "ctgn/diff/ops.hpp"
#include "ctgn/diff/params.hpp"

// Parameter registration and forward passes for the small set of layers the
// model uses. Parameters live under `prefix + "/..."`.
namespace ctgn::nn {

void add_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                std::mt19937_64& rng, bool bias = true);
// x . W (+ b)
Var linear(const ParamVars& p, const std::string& prefix, Var x, bool bias = true);

// GRU cell with fused gate weights (reset, update, candidate):
//   r = s(x Wr + h Ur + br), u = s(x Wu + h Uu + bu)
//   n = tanh(x Wn + bn + r * (h Un + cn)),  h' = (1 - u) * n + u * h
void add_gru(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t hidden,
             std::mt19937_64& rng);
Var gru_cell(const ParamVars& p, const std::string& prefix, Var x, Var h);

struct LstmState {
  Var h;
  Var c;
};

// LSTM cell with fused gates (input, forget, cell, output).
void add_lstm(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t hidden,
              std::mt19937_64& rng);
LstmState lstm_cell(const ParamVars& p, const std::string& prefix, Var x, LstmState state);

Var zeros(Tape& tape, std::size_t rows, std::size_t cols);

}  // namespace ctgn::nn
