#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "ctgn/diff/params.hpp"

namespace ctgn {

// Functional cosine time encoder phi(d)_k = sqrt(1/dim) * cos(omega_k d + b_k).
// Parameters: `prefix/omega` and `prefix/phase`, both 1 x dim.
//
// Frequencies start on the geometric grid omega_k = 10^(-9k/(dim-1)) with zero
// phase, which spans time scales from seconds to decades.
void add_time_encoder(ParamSet& params, const std::string& prefix, std::size_t dim);

// One row per delta. Deltas must be finite and non-negative.
Var encode_time(const ParamVars& p, const std::string& prefix, std::span<const double> deltas);

// Eager single-delta evaluation.
std::vector<double> encode_time(double delta, const Tensor& omega, const Tensor& phase);

// Encoded vectors w_t at strictly increasing timestamps.
struct EncodingSnapshotSeq {
  std::vector<double> timestamps;
  std::vector<std::vector<double>> vectors;
};

inline constexpr double kSmoothnessEps = 1e-12;

// sum_t ||w_{t+1} - w_t||_2 over consecutive rows; 0 for < 2 rows. The
// gradient uses sqrt(||.||^2 + kSmoothnessEps) so identical neighbours
// contribute a zero subgradient.
Var smoothness_loss(Var snapshots);
double smoothness_loss(const EncodingSnapshotSeq& snapshots);

// Sorted unique timestamps, the encoder inputs of the per-batch regularizer.
std::vector<double> unique_sorted(std::span<const double> times);

}  // namespace ctgn
