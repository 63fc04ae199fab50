#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ctgn/diff/params.hpp"
#include "ctgn/graph/event_store.hpp"

namespace ctgn {

// Step-sum average precision over scores sorted descending; equal scores
// keep their input order.
double average_precision(std::span<const double> scores, std::span<const int> labels);

// Mann-Whitney AUC: P(score_pos > score_neg) with ties counted as 1/2.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// One negative destination per event, uniform over `candidates` minus the
// event's true destination.
std::vector<NodeId> sample_negatives(std::span<const Event> batch,
                                     std::span<const NodeId> candidates, std::uint64_t seed);

// mean BCE(pos -> 1, neg -> 0) + alpha * smoothness on probabilities.
double task_loss(std::span<const double> pos_scores, std::span<const double> neg_scores);
double total_loss(std::span<const double> pos_scores, std::span<const double> neg_scores,
                  double smoothness, double alpha);

// Tape version on logits: mean BCE over [pos; neg] + alpha * smoothness.
Var total_loss(Var pos_logits, Var neg_logits, Var smoothness, double alpha);

}  // namespace ctgn
