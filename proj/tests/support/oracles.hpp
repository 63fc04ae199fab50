#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace ctgn::oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix identity(std::size_t n) {
  Matrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size(), k = b.size(), m = b[0].size();
  Matrix c(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][p] * b[p][j];
  return c;
}

inline double inf_norm(const Matrix& a) {
  double best = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double x : row) s += std::abs(x);
    best = std::max(best, s);
  }
  return best;
}

// exp(A) by scaling and squaring with a 20-term Taylor series.
inline Matrix expm(const Matrix& a) {
  const std::size_t n = a.size();
  int squarings = 0;
  double norm = inf_norm(a);
  while (norm > 0.5) {
    norm /= 2;
    ++squarings;
  }
  const double s = std::ldexp(1.0, -squarings);
  Matrix x(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) x[i][j] = a[i][j] * s;
  Matrix result = identity(n), term = identity(n);
  for (int k = 1; k <= 20; ++k) {
    term = matmul(term, x);
    for (auto& row : term)
      for (double& v : row) v /= k;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) result[i][j] += term[i][j];
  }
  for (int i = 0; i < squarings; ++i) result = matmul(result, result);
  return result;
}

// Random n x n matrix scaled so that its infinity norm, an upper bound on
// the spectral radius, equals `radius`.
inline Matrix random_contraction(std::size_t n, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(n, std::vector<double>(n));
  for (auto& row : a)
    for (double& v : row) v = g(rng);
  const double s = radius / inf_norm(a);
  for (auto& row : a)
    for (double& v : row) v *= s;
  return a;
}

// Average precision by enumerating every cut of the ranking: sort by score
// descending (stable), then sum precision@k over the positions of positives.
inline double brute_ap(const std::vector<double>& scores, const std::vector<int>& labels) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Insertion sort: stable by construction, O(n^2).
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = i; j > 0 && scores[order[j - 1]] < scores[order[j]]; --j)
      std::swap(order[j - 1], order[j]);
  std::size_t positives = 0;
  for (int y : labels) positives += y == 1;
  double ap = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[order[k]] != 1) continue;
    std::size_t hits = 0;
    for (std::size_t j = 0; j <= k; ++j) hits += labels[order[j]] == 1;
    ap += static_cast<double>(hits) / static_cast<double>(k + 1) / static_cast<double>(positives);
  }
  return ap;
}

// Pairwise Mann-Whitney count with ties worth one half.
inline double brute_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

}  // namespace ctgn::oracle
