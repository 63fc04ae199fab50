#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ctgn/diff/gradcheck.hpp"
#include "ctgn/diff/ops.hpp"
#include "ctgn/errors.hpp"
#include "ctgn/time_codec.hpp"
#include "test_util.hpp"

using namespace ctgn;
using ctgn::testing::randn;

TEST(EncodeTime, AnalyticValueAtPi) {
  const auto v = encode_time(std::numbers::pi, Tensor::row({1, 2}), Tensor::row({0, 0}));
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NEAR(v[0], -0.70711, 1e-5);
  EXPECT_NEAR(v[1], 0.70711, 1e-5);
}

TEST(EncodeTime, ZeroDeltaIsScaledCosOfPhase) {
  const Tensor omega = randn(1, 6, 1), phase = randn(1, 6, 2);
  const auto v = encode_time(0.0, omega, phase);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_DOUBLE_EQ(v[k], std::sqrt(1.0 / 6) * std::cos(phase[k]));
}

TEST(EncodeTime, CoordinatesAreBounded) {
  const Tensor omega = randn(1, 9, 3, 5.0), phase = randn(1, 9, 4, 3.0);
  std::mt19937_64 rng(5);
  std::exponential_distribution<double> d(0.01);
  for (int i = 0; i < 1000; ++i)
    for (double x : encode_time(d(rng), omega, phase)) EXPECT_LE(std::abs(x), std::sqrt(1.0 / 9) + 1e-15);
}

TEST(EncodeTime, NegativeDeltaIsContractViolation) {
  EXPECT_THROW(encode_time(-1e-9, Tensor::row({1}), Tensor::row({0})), ContractViolation);
  ParamSet ps;
  add_time_encoder(ps, "time", 4);
  Tape tape;
  ParamVars p(tape, ps);
  const std::vector<double> bad{1.0, -2.0};
  EXPECT_THROW(encode_time(p, "time", bad), ContractViolation);
}

TEST(EncodeTime, TapeAndEagerAgree) {
  ParamSet ps;
  add_time_encoder(ps, "time", 5);
  ps.set("time/phase", randn(1, 5, 6));
  const std::vector<double> deltas{0.0, 0.5, 7.0, 1e6};
  Tape tape;
  ParamVars p(tape, ps);
  const Var out = encode_time(p, "time", deltas);
  for (std::size_t r = 0; r < deltas.size(); ++r) {
    const auto eager = encode_time(deltas[r], ps.at("time/omega"), ps.at("time/phase"));
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(out.value()(r, k), eager[k], 1e-9);
  }
}

TEST(EncodeTime, GeometricFrequencyGrid) {
  ParamSet ps;
  add_time_encoder(ps, "time", 4);
  const Tensor& w = ps.at("time/omega");
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_NEAR(w[3], 1e-9, 1e-20);
  EXPECT_NEAR(w[1] / w[0], w[2] / w[1], 1e-12);
  for (double b : ps.at("time/phase").data()) EXPECT_EQ(b, 0.0);
}

TEST(EncodeTime, PassesGradCheck) {
  ParamSet ps;
  ps.add("time/omega", randn(1, 7, 7));
  ps.add("time/phase", randn(1, 7, 8));
  const std::vector<double> deltas{0.1, 0.9, 2.5};
  const Tensor w = randn(3, 7, 9);
  const auto r = grad_check([&](Tape& t, const ParamVars& p) {
    return ops::sum(ops::mul(encode_time(p, "time", deltas), t.constant(w)));
  }, ps);
  EXPECT_LT(r.max_rel_error, 1e-4);
}

namespace {

EncodingSnapshotSeq seq(std::vector<std::vector<double>> vs) {
  EncodingSnapshotSeq s;
  for (std::size_t i = 0; i < vs.size(); ++i) s.timestamps.push_back(static_cast<double>(i));
  s.vectors = std::move(vs);
  return s;
}

// Oracle: plain loop over consecutive rows.
double brute_smooth(const std::vector<std::vector<double>>& vs) {
  double total = 0;
  for (std::size_t i = 1; i < vs.size(); ++i) {
    double sq = 0;
    for (std::size_t k = 0; k < vs[i].size(); ++k) sq += (vs[i][k] - vs[i - 1][k]) * (vs[i][k] - vs[i - 1][k]);
    total += std::sqrt(sq);
  }
  return total;
}

std::vector<std::vector<double>> random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> out(n, std::vector<double>(d));
  for (auto& r : out)
    for (auto& x : r) x = g(rng);
  return out;
}

}  // namespace

TEST(Smoothness, HandExamples) {
  EXPECT_EQ(smoothness_loss(seq({{1, 2}, {1, 2}})), 0.0);
  EXPECT_DOUBLE_EQ(smoothness_loss(seq({{0, 0}, {3, 4}})), 5.0);
  EXPECT_EQ(smoothness_loss(seq({{3, 4}})), 0.0);
  EXPECT_EQ(smoothness_loss(seq({})), 0.0);
}

TEST(Smoothness, DimensionMismatchAndOrder) {
  EXPECT_THROW(smoothness_loss(seq({{0, 0}, {1}})), ContractViolation);
  EncodingSnapshotSeq s = seq({{0}, {1}});
  s.timestamps = {2.0, 1.0};
  EXPECT_THROW(smoothness_loss(s), ContractViolation);
}

TEST(Smoothness, TapeMatchesOracle) {
  std::mt19937_64 rng(10);
  for (int c = 0; c < 20; ++c) {
    const auto rows = random_rows(1 + rng() % 8, 1 + rng() % 5, rng);
    Tensor m = Tensor::zeros(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k];
    Tape tape;
    EXPECT_NEAR(smoothness_loss(tape.constant(m)).value().item(), brute_smooth(rows), 1e-12);
    EXPECT_NEAR(smoothness_loss(seq(rows)), brute_smooth(rows), 1e-12);
  }
}

TEST(Smoothness, ReversalInvariantInteriorSwapSensitive) {
  std::mt19937_64 rng(11);
  int changed = 0;
  for (int c = 0; c < 100; ++c) {
    auto rows = random_rows(5, 3, rng);
    const double v = smoothness_loss(seq(rows));
    auto rev = rows;
    std::reverse(rev.begin(), rev.end());
    EXPECT_NEAR(smoothness_loss(seq(rev)), v, 1e-12);
    auto swapped = rows;
    std::swap(swapped[1], swapped[3]);
    changed += std::abs(smoothness_loss(seq(swapped)) - v) > 1e-9;
    EXPECT_GE(v, 0.0);
  }
  EXPECT_GE(changed, 95);
}

TEST(Smoothness, ZeroIffAllIdentical) {
  EXPECT_EQ(smoothness_loss(seq({{1, 1}, {1, 1}, {1, 1}})), 0.0);
  EXPECT_GT(smoothness_loss(seq({{1, 1}, {1, 1}, {1, 1 + 1e-6}})), 0.0);
}

TEST(Smoothness, GradientDefinedAtIdenticalRows) {
  ParamSet ps;
  ps.add("w", Tensor::matrix(3, 2, {1, 2, 1, 2, 0, 5}));
  const auto g = grad([](Tape&, const ParamVars& p) { return smoothness_loss(p["w"]); }, ps);
  for (double x : g.at("w").data()) EXPECT_TRUE(std::isfinite(x));
  ParamSet q;
  q.add("w", randn(4, 3, 12));
  EXPECT_TRUE(grad_check([](Tape&, const ParamVars& p) { return smoothness_loss(p["w"]); }, q).passed);
}

TEST(UniqueSorted, SortsAndDeduplicates) {
  const std::vector<double> t{5, 1, 5, 3, 1};
  EXPECT_EQ(unique_sorted(t), (std::vector<double>{1, 3, 5}));
}
