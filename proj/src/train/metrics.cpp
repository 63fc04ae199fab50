#include "ctgn/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ctgn/diff/ops.hpp"
#include "ctgn/errors.hpp"

namespace ctgn {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* op) {
  CTGN_REQUIRE(scores.size() == labels.size(), std::string(op) + ": scores and labels differ in length");
  for (double s : scores) CTGN_REQUIRE(!std::isnan(s), std::string(op) + ": NaN score");
  for (int l : labels) CTGN_REQUIRE(l == 0 || l == 1, std::string(op) + ": labels must be 0 or 1");
}

}  // namespace

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "average_precision");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0) throw DataError("average_precision: no positive labels");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] != 1) continue;
    ++hits;
    ap += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return ap / static_cast<double>(positives);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "roc_auc");
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw DataError("roc_auc: both classes must be present");
  // Rank-sum with midranks for ties.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) rank_sum += mid;
    i = j;
  }
  const double p = static_cast<double>(pos), n = static_cast<double>(neg);
  return (rank_sum - p * (p + 1) / 2.0) / (p * n);
}

std::vector<NodeId> sample_negatives(std::span<const Event> batch,
                                     std::span<const NodeId> candidates, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.empty() ? 0 : candidates.size() - 1);
  std::vector<NodeId> out;
  out.reserve(batch.size());
  for (const Event& e : batch) {
    const bool only_true = candidates.size() == 1 && candidates[0] == e.dst;
    if (candidates.empty() || only_true)
      throw DataError("sample_negatives: no candidate destination other than " +
                      std::to_string(e.dst));
    NodeId n;
    do n = candidates[pick(rng)];
    while (n == e.dst);
    out.push_back(n);
  }
  return out;
}

double task_loss(std::span<const double> pos_scores, std::span<const double> neg_scores) {
  CTGN_REQUIRE(pos_scores.size() == neg_scores.size() && !pos_scores.empty(),
          "total_loss: need equal, non-zero counts of positive and negative scores");
  double sum = 0.0;
  for (double s : pos_scores) {
    CTGN_REQUIRE(s > 0.0 && s < 1.0, "total_loss: score outside (0, 1)");
    sum -= std::log(s);
  }
  for (double s : neg_scores) {
    CTGN_REQUIRE(s > 0.0 && s < 1.0, "total_loss: score outside (0, 1)");
    sum -= std::log1p(-s);
  }
  return sum / static_cast<double>(pos_scores.size() + neg_scores.size());
}

double total_loss(std::span<const double> pos_scores, std::span<const double> neg_scores,
                  double smoothness, double alpha) {
  return alpha * smoothness + task_loss(pos_scores, neg_scores);
}

Var total_loss(Var pos_logits, Var neg_logits, Var smoothness, double alpha) {
  CTGN_REQUIRE(pos_logits.rows() == neg_logits.rows(), "total_loss: unequal positive/negative counts");
  const std::vector<Var> both{pos_logits, neg_logits};
  std::vector<double> labels(2 * pos_logits.rows(), 0.0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(pos_logits.rows()), 1.0);
  Var task = ops::bce_with_logits(ops::concat_rows(both), labels);
  if (alpha == 0.0 || !smoothness.valid()) return task;
  return ops::add(task, ops::scale(smoothness, alpha));
}

}  // namespace ctgn
