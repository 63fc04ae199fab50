#include "ctgn/diff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "ctgn/errors.hpp"

namespace ctgn::ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;

CMap cmap(const Tensor& t) { return CMap(t.data().data(), t.rows(), t.cols()); }
MMap mmap(Tensor& t) { return MMap(t.data().data(), t.rows(), t.cols()); }

// GEMM in fixed 64-row blocks, the last one zero-padded, so every output row
// goes through the same kernel path whatever the total row count. A row's
// value then depends only on its own inputs and its offset.
constexpr std::size_t kGemmBlock = 64;

void gemm_rows(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  const CMap bm = cmap(b);
  RowMat pad, tail;
  for (std::size_t r = 0; r < m; r += kGemmBlock) {
    const std::size_t rows = std::min(kGemmBlock, m - r);
    MMap dst(out.data().data() + r * n, rows, n);
    if (rows == kGemmBlock) {
      dst.noalias() = CMap(a.data().data() + r * k, rows, k) * bm;
      continue;
    }
    pad = RowMat::Zero(kGemmBlock, k);
    pad.topRows(rows) = CMap(a.data().data() + r * k, rows, k);
    tail.noalias() = pad * bm;
    dst = tail.topRows(rows);
  }
}

Tape& tape_of(Var a) {
  CTGN_REQUIRE(a.valid(), "operation on an unbound variable");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  CTGN_REQUIRE(a.valid() && b.valid(), "operation on an unbound variable");
  CTGN_REQUIRE(a.tape() == b.tape(), "operands recorded on different tapes");
  return *a.tape();
}

void require_same_shape(Var a, Var b, const char* op) {
  CTGN_REQUIRE(a.value().same_shape(b.value()), std::string(op) + ": shape mismatch " +
                                               a.value().shape_string() + " vs " +
                                               b.value().shape_string());
}

void accumulate(Tape& tape, Var target, const Tensor& delta) {
  if (!target.requires_grad()) return;
  auto g = tape.grad_buffer(target).data();
  auto d = delta.data();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += d[i];
}

// Elementwise unary op; `deriv(x)` returns dy/dx at x.
template <typename Fwd, typename Deriv>
Var unary(Var a, const char* op, Fwd fwd, Deriv deriv) {
  Tape& tape = tape_of(a);
  Tensor out(a.value().shape());
  auto x = a.value().data();
  auto y = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  return tape.record(std::move(out), a.requires_grad(),
                     [a, deriv](Tape& t, const Tensor& g) {
                       auto ga = t.grad_buffer(a).data();
                       auto xs = a.value().data();
                       auto gs = g.data();
                       for (std::size_t i = 0; i < xs.size(); ++i) ga[i] += gs[i] * deriv(xs[i]);
                     },
                     op);
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  CTGN_REQUIRE(av.cols() == bv.rows(), "matmul: inner dimensions differ " + av.shape_string() +
                                      " . " + bv.shape_string());
  Tensor out = Tensor::zeros(av.rows(), bv.cols());
  gemm_rows(av, bv, out);
  return tape.record(std::move(out), a.requires_grad() || b.requires_grad(),
                     [a, b](Tape& t, const Tensor& g) {
                       if (a.requires_grad())
                         mmap(t.grad_buffer(a)).noalias() += cmap(g) * cmap(b.value()).transpose();
                       if (b.requires_grad())
                         mmap(t.grad_buffer(b)).noalias() += cmap(a.value()).transpose() * cmap(g);
                     },
                     "matmul");
}

Var add(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return tape.record(std::move(out), a.requires_grad() || b.requires_grad(),
                     [a, b](Tape& t, const Tensor& g) {
                       accumulate(t, a, g);
                       accumulate(t, b, g);
                     },
                     "add");
}

Var sub(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  return tape.record(std::move(out), a.requires_grad() || b.requires_grad(),
                     [a, b](Tape& t, const Tensor& g) {
                       accumulate(t, a, g);
                       if (b.requires_grad()) {
                         auto gb = t.grad_buffer(b).data();
                         auto gs = g.data();
                         for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= gs[i];
                       }
                     },
                     "sub");
}

Var mul(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  return tape.record(std::move(out), a.requires_grad() || b.requires_grad(),
                     [a, b](Tape& t, const Tensor& g) {
                       auto gs = g.data();
                       if (a.requires_grad()) {
                         auto ga = t.grad_buffer(a).data();
                         auto bv = b.value().data();
                         for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gs[i] * bv[i];
                       }
                       if (b.requires_grad()) {
                         auto gb = t.grad_buffer(b).data();
                         auto av = a.value().data();
                         for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += gs[i] * av[i];
                       }
                     },
                     "mul");
}

Var scale(Var a, double c) {
  Tape& tape = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v *= c;
  return tape.record(std::move(out), a.requires_grad(),
                     [a, c](Tape& t, const Tensor& g) {
                       auto ga = t.grad_buffer(a).data();
                       auto gs = g.data();
                       for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += c * gs[i];
                     },
                     "scale");
}

Var add_scalar(Var a, double c) {
  Tape& tape = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v += c;
  return tape.record(std::move(out), a.requires_grad(),
                     [a](Tape& t, const Tensor& g) { accumulate(t, a, g); }, "add_scalar");
}

Var add_bias(Var a, Var bias) {
  Tape& tape = tape_of(a, bias);
  const Tensor& av = a.value();
  const Tensor& bv = bias.value();
  CTGN_REQUIRE(bv.rows() == 1 && bv.cols() == av.cols(),
          "add_bias: bias " + bv.shape_string() + " does not fit " + av.shape_string());
  Tensor out = av;
  const std::size_t m = av.rows(), n = av.cols();
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) += bv[c];
  return tape.record(std::move(out), a.requires_grad() || bias.requires_grad(),
                     [a, bias, m, n](Tape& t, const Tensor& g) {
                       accumulate(t, a, g);
                       if (bias.requires_grad()) {
                         auto& gb = t.grad_buffer(bias);
                         for (std::size_t r = 0; r < m; ++r)
                           for (std::size_t c = 0; c < n; ++c) gb[c] += g(r, c);
                       }
                     },
                     "add_bias");
}

Var scale_rows(Var a, Var col) {
  Tape& tape = tape_of(a, col);
  const Tensor& av = a.value();
  const Tensor& cv = col.value();
  CTGN_REQUIRE(cv.cols() == 1 && cv.rows() == av.rows(),
          "scale_rows: column " + cv.shape_string() + " does not fit " + av.shape_string());
  Tensor out = av;
  const std::size_t m = av.rows(), n = av.cols();
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) *= cv[r];
  return tape.record(std::move(out), a.requires_grad() || col.requires_grad(),
                     [a, col, m, n](Tape& t, const Tensor& g) {
                       if (a.requires_grad()) {
                         auto& ga = t.grad_buffer(a);
                         const Tensor& cv = col.value();
                         for (std::size_t r = 0; r < m; ++r)
                           for (std::size_t c = 0; c < n; ++c) ga(r, c) += g(r, c) * cv[r];
                       }
                       if (col.requires_grad()) {
                         auto& gc = t.grad_buffer(col);
                         const Tensor& av = a.value();
                         for (std::size_t r = 0; r < m; ++r)
                           for (std::size_t c = 0; c < n; ++c) gc[r] += g(r, c) * av(r, c);
                       }
                     },
                     "scale_rows");
}

Var neg(Var a) { return scale(a, -1.0); }

Var sigmoid(Var a) {
  auto f = [](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  };
  return unary(a, "sigmoid", f, [f](double x) {
    const double s = f(x);
    return s * (1.0 - s);
  });
}

Var tanh(Var a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); },
               [](double x) {
                 const double y = std::tanh(x);
                 return 1.0 - y * y;
               });
}

Var relu(Var a) {
  return unary(a, "relu", [](double x) { return x > 0 ? x : 0.0; },
               [](double x) { return x > 0 ? 1.0 : 0.0; });
}

Var cos(Var a) {
  return unary(a, "cos", [](double x) { return std::cos(x); },
               [](double x) { return -std::sin(x); });
}

Var exp(Var a) {
  return unary(a, "exp", [](double x) { return std::exp(x); },
               [](double x) { return std::exp(x); });
}

Var log(Var a) {
  return unary(a, "log", [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var sqrt(Var a) {
  return unary(a, "sqrt", [](double x) { return std::sqrt(x); },
               [](double x) { return 0.5 / std::sqrt(x); });
}

Var square(Var a) {
  return unary(a, "square", [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var concat_cols(std::span<const Var> parts) {
  CTGN_REQUIRE(!parts.empty(), "concat_cols: no operands");
  Tape& tape = tape_of(parts[0]);
  const std::size_t m = parts[0].rows();
  std::size_t n = 0;
  bool rg = false;
  for (const Var& p : parts) {
    CTGN_REQUIRE(p.tape() == &tape, "concat_cols: operands on different tapes");
    CTGN_REQUIRE(p.rows() == m, "concat_cols: row counts differ");
    n += p.cols();
    rg = rg || p.requires_grad();
  }
  Tensor out = Tensor::zeros(m, n);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    for (std::size_t r = 0; r < m; ++r)
      std::copy_n(pv.row_span(r).begin(), pv.cols(), out.row_span(r).begin() + off);
    off += pv.cols();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return tape.record(std::move(out), rg,
                     [ins, m](Tape& t, const Tensor& g) {
                       std::size_t off = 0;
                       for (const Var& p : ins) {
                         const std::size_t w = p.cols();
                         if (p.requires_grad()) {
                           auto& gp = t.grad_buffer(p);
                           for (std::size_t r = 0; r < m; ++r)
                             for (std::size_t c = 0; c < w; ++c) gp(r, c) += g(r, off + c);
                         }
                         off += w;
                       }
                     },
                     "concat_cols");
}

Var concat_rows(std::span<const Var> parts) {
  CTGN_REQUIRE(!parts.empty(), "concat_rows: no operands");
  Tape& tape = tape_of(parts[0]);
  const std::size_t n = parts[0].cols();
  std::size_t m = 0;
  bool rg = false;
  for (const Var& p : parts) {
    CTGN_REQUIRE(p.tape() == &tape, "concat_rows: operands on different tapes");
    CTGN_REQUIRE(p.cols() == n, "concat_rows: column counts differ");
    m += p.rows();
    rg = rg || p.requires_grad();
  }
  Tensor out = Tensor::zeros(m, n);
  auto o = out.data().begin();
  for (const Var& p : parts) o = std::copy(p.value().data().begin(), p.value().data().end(), o);
  std::vector<Var> ins(parts.begin(), parts.end());
  return tape.record(std::move(out), rg,
                     [ins](Tape& t, const Tensor& g) {
                       std::size_t off = 0;
                       for (const Var& p : ins) {
                         const std::size_t len = p.value().size();
                         if (p.requires_grad()) {
                           auto gp = t.grad_buffer(p).data();
                           for (std::size_t i = 0; i < len; ++i) gp[i] += g[off + i];
                         }
                         off += len;
                       }
                     },
                     "concat_rows");
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  CTGN_REQUIRE(count > 0 && begin + count <= av.cols(), "slice_cols: range out of bounds");
  const std::size_t m = av.rows();
  Tensor out = Tensor::zeros(m, count);
  for (std::size_t r = 0; r < m; ++r)
    std::copy_n(av.row_span(r).begin() + begin, count, out.row_span(r).begin());
  return tape.record(std::move(out), a.requires_grad(),
                     [a, begin, count, m](Tape& t, const Tensor& g) {
                       auto& ga = t.grad_buffer(a);
                       for (std::size_t r = 0; r < m; ++r)
                         for (std::size_t c = 0; c < count; ++c) ga(r, begin + c) += g(r, c);
                     },
                     "slice_cols");
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  CTGN_REQUIRE(count > 0 && begin + count <= av.rows(), "slice_rows: range out of bounds");
  const std::size_t n = av.cols();
  std::vector<double> data(av.data().begin() + begin * n, av.data().begin() + (begin + count) * n);
  return tape.record(Tensor::matrix(count, n, std::move(data)), a.requires_grad(),
                     [a, begin, n](Tape& t, const Tensor& g) {
                       auto ga = t.grad_buffer(a).data();
                       for (std::size_t i = 0; i < g.size(); ++i) ga[begin * n + i] += g[i];
                     },
                     "slice_rows");
}

Var gather_rows(Var a, std::span<const std::ptrdiff_t> index) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  CTGN_REQUIRE(!index.empty(), "gather_rows: empty index");
  const std::size_t n = av.cols();
  const auto m = static_cast<std::ptrdiff_t>(av.rows());
  Tensor out = Tensor::zeros(index.size(), n);
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto src = index[r];
    CTGN_REQUIRE(src >= -1 && src < m, "gather_rows: index out of range");
    if (src >= 0) std::copy_n(av.row_span(static_cast<std::size_t>(src)).begin(), n,
                              out.row_span(r).begin());
  }
  std::vector<std::ptrdiff_t> idx(index.begin(), index.end());
  return tape.record(std::move(out), a.requires_grad(),
                     [a, idx = std::move(idx), n](Tape& t, const Tensor& g) {
                       auto& ga = t.grad_buffer(a);
                       for (std::size_t r = 0; r < idx.size(); ++r) {
                         if (idx[r] < 0) continue;
                         auto dst = ga.row_span(static_cast<std::size_t>(idx[r]));
                         auto src = g.row_span(r);
                         for (std::size_t c = 0; c < n; ++c) dst[c] += src[c];
                       }
                     },
                     "gather_rows");
}

Var sum(Var a) {
  Tape& tape = tape_of(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return tape.record(Tensor::scalar(s), a.requires_grad(),
                     [a](Tape& t, const Tensor& g) {
                       const double gs = g[0];
                       for (double& v : t.grad_buffer(a).data()) v += gs;
                     },
                     "sum");
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var row_norm(Var a, double eps) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const std::size_t m = av.rows(), n = av.cols();
  Tensor out = Tensor::zeros(m, 1);
  Tensor norms = Tensor::zeros(m, 1);
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (double v : av.row_span(r)) s += v * v;
    out[r] = std::sqrt(s);
    norms[r] = std::sqrt(s + eps);
  }
  return tape.record(std::move(out), a.requires_grad(),
                     [a, norms = std::move(norms), m, n](Tape& t, const Tensor& g) {
                       auto& ga = t.grad_buffer(a);
                       const Tensor& av = a.value();
                       for (std::size_t r = 0; r < m; ++r) {
                         const double k = g[r] / norms[r];
                         for (std::size_t c = 0; c < n; ++c) ga(r, c) += k * av(r, c);
                       }
                     },
                     "row_norm");
}

Var bce_with_logits(Var logits, std::span<const double> labels) {
  Tape& tape = tape_of(logits);
  const Tensor& lv = logits.value();
  CTGN_REQUIRE(lv.cols() == 1 && lv.rows() == labels.size(),
          "bce_with_logits: logits must be a column matching the label count");
  const std::size_t m = lv.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = lv[i];
    // -[y log s(x) + (1-y) log(1 - s(x))] = softplus(x) - y x
    const double softplus = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
    total += softplus - labels[i] * x;
  }
  std::vector<double> ys(labels.begin(), labels.end());
  return tape.record(Tensor::scalar(total / static_cast<double>(m)), logits.requires_grad(),
                     [logits, ys = std::move(ys), m](Tape& t, const Tensor& g) {
                       auto& gl = t.grad_buffer(logits);
                       const Tensor& lv = logits.value();
                       const double k = g[0] / static_cast<double>(m);
                       for (std::size_t i = 0; i < m; ++i) {
                         const double x = lv[i];
                         const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                                                 : std::exp(x) / (1.0 + std::exp(x));
                         gl[i] += k * (s - ys[i]);
                       }
                     },
                     "bce_with_logits");
}

Var softmax_rows(Var logits) {
  Tape& tape = tape_of(logits);
  const Tensor& lv = logits.value();
  const std::size_t m = lv.rows(), n = lv.cols();
  Tensor out = lv;
  for (std::size_t r = 0; r < m; ++r) {
    auto row = out.row_span(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& v : row) z += (v = std::exp(v - mx));
    for (double& v : row) v /= z;
  }
  Tensor probs = out;
  return tape.record(std::move(out), logits.requires_grad(),
                     [logits, probs = std::move(probs), m, n](Tape& t, const Tensor& g) {
                       auto& gl = t.grad_buffer(logits);
                       for (std::size_t r = 0; r < m; ++r) {
                         double dot = 0.0;
                         for (std::size_t c = 0; c < n; ++c) dot += g(r, c) * probs(r, c);
                         for (std::size_t c = 0; c < n; ++c)
                           gl(r, c) += probs(r, c) * (g(r, c) - dot);
                       }
                     },
                     "softmax_rows");
}

Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels) {
  Tape& tape = tape_of(logits);
  const Tensor& lv = logits.value();
  const std::size_t m = lv.rows(), n = lv.cols();
  CTGN_REQUIRE(labels.size() == m, "softmax_cross_entropy: label count mismatch");
  Tensor probs = lv;
  double total = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    CTGN_REQUIRE(labels[r] < n, "softmax_cross_entropy: label out of range");
    auto row = probs.row_span(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    total -= row[labels[r]] - mx - std::log(z);
    for (double& v : row) v = std::exp(v - mx) / z;
  }
  std::vector<std::size_t> ys(labels.begin(), labels.end());
  return tape.record(Tensor::scalar(total / static_cast<double>(m)), logits.requires_grad(),
                     [logits, probs = std::move(probs), ys = std::move(ys), m, n](
                         Tape& t, const Tensor& g) {
                       auto& gl = t.grad_buffer(logits);
                       const double k = g[0] / static_cast<double>(m);
                       for (std::size_t r = 0; r < m; ++r)
                         for (std::size_t c = 0; c < n; ++c)
                           gl(r, c) += k * (probs(r, c) - (c == ys[r] ? 1.0 : 0.0));
                     },
                     "softmax_cross_entropy");
}

Var multihead_attention(Var q, Var k, Var v, std::span<const std::size_t> counts,
                        std::size_t heads, std::size_t slots, Tensor* weights_out) {
  Tape& tape = tape_of(q, k);
  CTGN_REQUIRE(v.tape() == &tape, "attention: operands on different tapes");
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  const std::size_t batch = qv.rows(), d = qv.cols();
  CTGN_REQUIRE(heads >= 1 && d % heads == 0, "attention: width " + std::to_string(d) +
                                            " not divisible by head count " +
                                            std::to_string(heads));
  CTGN_REQUIRE(slots >= 1, "attention: need at least one slot");
  CTGN_REQUIRE(kv.cols() == d && vv.cols() == d, "attention: query/key/value widths differ");
  CTGN_REQUIRE(kv.rows() == batch * slots && vv.rows() == batch * slots,
          "attention: key/value rows must equal batch * slots");
  CTGN_REQUIRE(counts.size() == batch, "attention: one live-slot count per query required");
  for (auto c : counts) CTGN_REQUIRE(c >= 1 && c <= slots, "attention: live-slot count out of range");

  const std::size_t dh = d / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor weights = Tensor::zeros(batch * heads, slots);
  Tensor out = Tensor::zeros(batch, d);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t live = counts[b];
    for (std::size_t h = 0; h < heads; ++h) {
      auto w = weights.row_span(b * heads + h);
      const std::size_t off = h * dh;
      double mx = -INFINITY;
      for (std::size_t n = 0; n < live; ++n) {
        double s = 0.0;
        for (std::size_t c = 0; c < dh; ++c) s += qv(b, off + c) * kv(b * slots + n, off + c);
        w[n] = s * inv_scale;
        mx = std::max(mx, w[n]);
      }
      double z = 0.0;
      for (std::size_t n = 0; n < live; ++n) z += (w[n] = std::exp(w[n] - mx));
      for (std::size_t n = 0; n < live; ++n) {
        w[n] /= z;
        for (std::size_t c = 0; c < dh; ++c) out(b, off + c) += w[n] * vv(b * slots + n, off + c);
      }
    }
  }
  if (weights_out) *weights_out = weights;
  std::vector<std::size_t> live_counts(counts.begin(), counts.end());
  const bool rg = q.requires_grad() || k.requires_grad() || v.requires_grad();
  return tape.record(
      std::move(out), rg,
      [q, k, v, weights = std::move(weights), live_counts = std::move(live_counts), heads, slots,
       dh, inv_scale](Tape& t, const Tensor& g) {
        const Tensor& qv = q.value();
        const Tensor& kv = k.value();
        const Tensor& vv = v.value();
        Tensor* gq = q.requires_grad() ? &t.grad_buffer(q) : nullptr;
        Tensor* gk = k.requires_grad() ? &t.grad_buffer(k) : nullptr;
        Tensor* gv = v.requires_grad() ? &t.grad_buffer(v) : nullptr;
        std::vector<double> dw(slots);
        for (std::size_t b = 0; b < live_counts.size(); ++b) {
          const std::size_t live = live_counts[b];
          for (std::size_t h = 0; h < heads; ++h) {
            auto w = weights.row_span(b * heads + h);
            const std::size_t off = h * dh;
            double wdot = 0.0;
            for (std::size_t n = 0; n < live; ++n) {
              const std::size_t row = b * slots + n;
              double s = 0.0;
              for (std::size_t c = 0; c < dh; ++c) {
                s += g(b, off + c) * vv(row, off + c);
                if (gv) (*gv)(row, off + c) += w[n] * g(b, off + c);
              }
              dw[n] = s;
              wdot += w[n] * s;
            }
            for (std::size_t n = 0; n < live; ++n) {
              const std::size_t row = b * slots + n;
              const double ds = w[n] * (dw[n] - wdot) * inv_scale;
              for (std::size_t c = 0; c < dh; ++c) {
                if (gq) (*gq)(b, off + c) += ds * kv(row, off + c);
                if (gk) (*gk)(row, off + c) += ds * qv(b, off + c);
              }
            }
          }
        }
      },
      "attention");
}

}  // namespace ctgn::ops
