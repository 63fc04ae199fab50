#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctgn/diff/tape.hpp"

// Differentiable operations over rank-2 tensors. Broadcasting is limited to
// row-wise bias addition and per-row scaling by a column vector.
namespace ctgn::ops {

Var matmul(Var a, Var b);  // (m x k) . (k x n)
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var add_bias(Var a, Var bias);    // a: m x n, bias: 1 x n
Var scale_rows(Var a, Var col);   // a: m x n, col: m x 1

Var neg(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var cos(Var a);
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var square(Var a);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
// Row r of the result is row index[r] of `a`; index -1 yields a zero row.
Var gather_rows(Var a, std::span<const std::ptrdiff_t> index);

Var sum(Var a);   // -> 1 x 1
Var mean(Var a);  // -> 1 x 1
// Euclidean norm per row -> m x 1. The backward pass differentiates
// sqrt(sum_j a_ij^2 + eps) instead, so the gradient stays defined at 0.
Var row_norm(Var a, double eps);

// Mean binary cross-entropy of sigmoid(logits) against 0/1 labels.
// logits: m x 1. Computed in the numerically stable softplus form.
Var bce_with_logits(Var logits, std::span<const double> labels);
Var softmax_rows(Var logits);
// Mean negative log-likelihood of integer class labels under softmax(logits).
Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels);

// Batched multi-head scaled dot-product attention.
//   q:      B x d          one query per item
//   k, v:   (B*slots) x d  `slots` key/value rows per item, row b*slots + n
//   counts: number of live slots per item (1..slots); later slots are masked
// Each head attends over its d/heads column slice with scale
// 1/sqrt(d/heads). If `weights_out` is given it receives the attention
// weights as (B*heads) x slots, zero in masked slots.
Var multihead_attention(Var q, Var k, Var v, std::span<const std::size_t> counts,
                        std::size_t heads, std::size_t slots, Tensor* weights_out = nullptr);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace ctgn::ops
