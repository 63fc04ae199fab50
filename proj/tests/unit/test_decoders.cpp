#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ctgn/decoders.hpp"
#include "ctgn/errors.hpp"
#include "ctgn/train/gradcheck_suite.hpp"
#include "test_util.hpp"

using namespace ctgn;
using ctgn::testing::randn;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void zero_all(ParamSet& ps) {
  for (auto& [_, t] : ps)
    for (auto& x : t.data()) x = 0.0;
}

// Scalar-loop LSTM step with gate blocks (input, forget, cell, output).
void lstm_step(const ParamSet& ps, const std::string& pre, const std::vector<double>& x,
               std::vector<double>& h, std::vector<double>& c) {
  const std::size_t d = h.size();
  const Tensor& wi = ps.at(pre + "/w_in");
  const Tensor& wh = ps.at(pre + "/w_hid");
  const Tensor& b = ps.at(pre + "/b");
  std::vector<double> g(4 * d);
  for (std::size_t j = 0; j < 4 * d; ++j) {
    g[j] = b[j];
    for (std::size_t k = 0; k < x.size(); ++k) g[j] += x[k] * wi(k, j);
    for (std::size_t k = 0; k < d; ++k) g[j] += h[k] * wh(k, j);
  }
  for (std::size_t j = 0; j < d; ++j) {
    c[j] = sig(g[d + j]) * c[j] + sig(g[j]) * std::tanh(g[2 * d + j]);
    h[j] = sig(g[3 * d + j]) * std::tanh(c[j]);
  }
}

}  // namespace

TEST(LinkDecoder, ZeroLstmScoresSigmoidOfBias) {
  LinkDecoder dec{"link", 1, 1};
  ParamSet ps;
  std::mt19937_64 rng(1);
  dec.add_params(ps, rng);
  zero_all(ps);
  ps.at("link/out/b")[0] = 0.8;
  const auto s = dec.score(ps, Tensor::column({0.3, -2.0}), Tensor::column({1.7, 0.1}));
  for (double x : s) EXPECT_DOUBLE_EQ(x, sig(0.8));
}

TEST(LinkDecoder, MatchesScalarLoopOracle) {
  LinkDecoder dec{"link", 3, 4};
  ParamSet ps;
  std::mt19937_64 rng(2);
  dec.add_params(ps, rng);
  ps.set("link/lstm/b", randn(1, 16, 3));
  ps.set("link/out/b", randn(1, 1, 4));
  const Tensor zs = randn(5, 3, 5), zd = randn(5, 3, 6);
  const auto got = dec.score(ps, zs, zd);
  for (std::size_t r = 0; r < 5; ++r) {
    std::vector<double> h(4, 0.0), c(4, 0.0);
    lstm_step(ps, "link/lstm", {zs.row_span(r).begin(), zs.row_span(r).end()}, h, c);
    lstm_step(ps, "link/lstm", {zd.row_span(r).begin(), zd.row_span(r).end()}, h, c);
    double logit = ps.at("link/out/b")[0];
    for (std::size_t k = 0; k < 4; ++k) logit += h[k] * ps.at("link/out/w")(k, 0);
    EXPECT_NEAR(got[r], sig(logit), 1e-14);
  }
}

TEST(LinkDecoder, InsideUnitIntervalDeterministicAndOrdered) {
  LinkDecoder dec{"link", 6, 6};
  ParamSet ps;
  std::mt19937_64 rng(7);
  dec.add_params(ps, rng);
  const Tensor a = randn(50, 6, 8, 3.0), b = randn(50, 6, 9, 3.0);
  const auto s = dec.score(ps, a, b);
  for (double x : s) {
    EXPECT_GT(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_EQ(dec.score(ps, a, b), s);
  // Direction is encoded by sequence order.
  EXPECT_NE(dec.score(ps, b, a), s);
}

TEST(LinkDecoder, DimensionMismatchIsContractViolation) {
  LinkDecoder dec{"link", 3, 2};
  ParamSet ps;
  std::mt19937_64 rng(1);
  dec.add_params(ps, rng);
  EXPECT_THROW(dec.score(ps, randn(2, 4, 1), randn(2, 3, 2)), ContractViolation);
  EXPECT_THROW(dec.score(ps, randn(2, 3, 1), randn(3, 3, 2)), ContractViolation);
}

TEST(NodeClassifier, ZeroWeightsGiveUniform) {
  NodeClassifier cls{"cls", 5, 4, 2, 0.1};
  ParamSet ps;
  std::mt19937_64 rng(1);
  cls.add_params(ps, rng);
  zero_all(ps);
  const Tensor p = cls.classify(ps, randn(3, 5, 2));
  for (double x : p.data()) EXPECT_EQ(x, 0.5);
}

TEST(NodeClassifier, HandSizedMlp) {
  NodeClassifier cls{"cls", 2, 2, 2, 0.0};
  ParamSet ps;
  std::mt19937_64 rng(1);
  cls.add_params(ps, rng);
  ps.set("cls/l1/w", Tensor::matrix(2, 2, {1.0, -1.0, 0.5, 2.0}));
  ps.set("cls/l1/b", Tensor::row({0.1, -0.2}));
  ps.set("cls/l2/w", Tensor::matrix(2, 2, {0.3, -0.7, 1.1, 0.4}));
  ps.set("cls/l2/b", Tensor::row({0.05, -0.05}));
  // z = (1, 2): hidden = relu(1*1 + 2*0.5 + 0.1, 1*-1 + 2*2 - 0.2) = (2.1, 2.8)
  // logits = (2.1*0.3 + 2.8*1.1 + 0.05, 2.1*-0.7 + 2.8*0.4 - 0.05) = (3.76, -0.4)
  const Tensor p = cls.classify(ps, Tensor::row({1.0, 2.0}));
  const double e0 = std::exp(3.76), e1 = std::exp(-0.4);
  EXPECT_NEAR(p[0], e0 / (e0 + e1), 1e-12);
  EXPECT_NEAR(p[1], e1 / (e0 + e1), 1e-12);
  // z = (-1, 0): hidden = relu(-0.9, 0.8) = (0, 0.8)
  const Tensor q = cls.classify(ps, Tensor::row({-1.0, 0.0}));
  const double f0 = std::exp(0.8 * 1.1 + 0.05), f1 = std::exp(0.8 * 0.4 - 0.05);
  EXPECT_NEAR(q[0], f0 / (f0 + f1), 1e-12);
}

TEST(NodeClassifier, ProbabilitiesSumToOne) {
  NodeClassifier cls{"cls", 6, 80, 3, 0.1};
  ParamSet ps;
  std::mt19937_64 rng(3);
  cls.add_params(ps, rng);
  const Tensor p = cls.classify(ps, randn(40, 6, 4, 5.0));
  for (std::size_t r = 0; r < p.rows(); ++r) {
    const auto row = p.row_span(r);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(NodeClassifier, DropoutOnlyInTrainingMode) {
  NodeClassifier cls{"cls", 4, 50, 2, 0.5};
  ParamSet ps;
  std::mt19937_64 rng(5);
  cls.add_params(ps, rng);
  const Tensor z = randn(3, 4, 6);
  Tape tape;
  ParamVars p(tape, ps, false);
  const Tensor eval1 = cls.logits(p, tape.constant(z)).value();
  const Tensor eval2 = cls.logits(p, tape.constant(z)).value();
  EXPECT_EQ(eval1, eval2);
  std::mt19937_64 drop(7);
  EXPECT_NE(cls.logits(p, tape.constant(z), &drop).value(), eval1);
  std::mt19937_64 d1(8), d2(8);
  const Tensor a = cls.logits(p, tape.constant(z), &d1).value();
  const Tensor b = cls.logits(p, tape.constant(z), &d2).value();
  EXPECT_EQ(a, b);
}

TEST(Decoders, PassGradCheck) {
  const auto r = run_gradcheck("decoders");
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}
