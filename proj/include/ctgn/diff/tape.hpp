#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ctgn/diff/tensor.hpp"

namespace ctgn {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Reverse-mode recording of a computation. Nodes are appended in evaluation
// order; backward() walks them in reverse. A tape is single-threaded.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var leaf(Tensor value, bool requires_grad = true);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  // Gradient accumulated into v by the last backward(); zeros if none.
  Tensor grad(Var v) const;

  // Seeds d(root)/d(root) = 1; root must be 1 x 1.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

  // Op-author API. `op` names the operation in numeric error messages.
  Var record(Tensor value, bool requires_grad, BackwardFn backward, const char* op);
  // Mutable gradient buffer of a node, allocated as zeros on first use.
  Tensor& grad_buffer(Var v);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

}  // namespace ctgn
