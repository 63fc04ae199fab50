#include "ctgn/time_codec.hpp"

#include <algorithm>
#include <cmath>

#include "ctgn/diff/ops.hpp"
#include "ctgn/errors.hpp"

namespace ctgn {

using namespace ctgn::ops;

void add_time_encoder(ParamSet& params, const std::string& prefix, std::size_t dim) {
  CTGN_REQUIRE(dim >= 1, "time encoder dimension must be at least 1");
  Tensor omega = Tensor::zeros(1, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const double expo = dim == 1 ? 0.0 : 9.0 * static_cast<double>(k) / static_cast<double>(dim - 1);
    omega[k] = std::pow(10.0, -expo);
  }
  params.add(prefix + "/omega", std::move(omega));
  params.add(prefix + "/phase", Tensor::zeros(1, dim));
}

Var encode_time(const ParamVars& p, const std::string& prefix, std::span<const double> deltas) {
  CTGN_REQUIRE(!deltas.empty(), "encode_time: no inputs");
  for (double d : deltas)
    CTGN_REQUIRE(std::isfinite(d) && d >= 0, "encode_time: elapsed time must be finite and >= 0");
  Var omega = p[prefix + "/omega"];
  const auto dim = omega.cols();
  Var col = p.tape().constant(Tensor::column({deltas.begin(), deltas.end()}));
  Var arg = add_bias(matmul(col, omega), p[prefix + "/phase"]);
  return scale(cos(arg), std::sqrt(1.0 / static_cast<double>(dim)));
}

std::vector<double> encode_time(double delta, const Tensor& omega, const Tensor& phase) {
  CTGN_REQUIRE(std::isfinite(delta) && delta >= 0, "encode_time: elapsed time must be finite and >= 0");
  CTGN_REQUIRE(omega.size() == phase.size() && omega.size() >= 1, "encode_time: bad parameters");
  const double s = std::sqrt(1.0 / static_cast<double>(omega.size()));
  std::vector<double> out(omega.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = s * std::cos(omega[k] * delta + phase[k]);
  return out;
}

Var smoothness_loss(Var snapshots) {
  const auto rows = snapshots.rows();
  if (rows < 2) return snapshots.tape()->constant(Tensor::scalar(0.0));
  Var diff = sub(slice_rows(snapshots, 1, rows - 1), slice_rows(snapshots, 0, rows - 1));
  return sum(row_norm(diff, kSmoothnessEps));
}

double smoothness_loss(const EncodingSnapshotSeq& s) {
  CTGN_REQUIRE(s.timestamps.size() == s.vectors.size(), "smoothness_loss: timestamp/vector count differ");
  double total = 0.0;
  for (std::size_t i = 1; i < s.vectors.size(); ++i) {
    CTGN_REQUIRE(s.timestamps[i] > s.timestamps[i - 1], "smoothness_loss: timestamps must increase");
    CTGN_REQUIRE(s.vectors[i].size() == s.vectors[0].size(), "smoothness_loss: dimension mismatch");
    double sq = 0.0;
    for (std::size_t k = 0; k < s.vectors[i].size(); ++k) {
      const double d = s.vectors[i][k] - s.vectors[i - 1][k];
      sq += d * d;
    }
    total += std::sqrt(sq);
  }
  return total;
}

std::vector<double> unique_sorted(std::span<const double> times) {
  std::vector<double> out(times.begin(), times.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace ctgn
