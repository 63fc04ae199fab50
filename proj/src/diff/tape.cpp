#include "ctgn/diff/tape.hpp"

#include "ctgn/errors.hpp"

namespace ctgn {

const Tensor& Var::value() const { return tape_->value(*this); }
bool Var::requires_grad() const { return tape_->requires_grad(*this); }

Var Tape::constant(Tensor value) { return record(std::move(value), false, nullptr, "constant"); }

Var Tape::leaf(Tensor value, bool requires_grad) {
  return record(std::move(value), requires_grad, nullptr, "leaf");
}

Var Tape::record(Tensor value, bool requires_grad, BackwardFn backward, const char* op) {
  if (!value.all_finite())
    throw NumericError(std::string("non-finite value produced by ") + op);
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Tensor& Tape::grad_buffer(Var v) {
  auto& node = nodes_[v.id()];
  if (node.grad.empty()) node.grad = Tensor(node.value.shape(), 0.0);
  return node.grad;
}

Tensor Tape::grad(Var v) const {
  const auto& node = nodes_[v.id()];
  if (node.grad.empty()) return Tensor(node.value.shape(), 0.0);
  return node.grad;
}

void Tape::backward(Var root) {
  CTGN_REQUIRE(root.tape() == this, "backward: variable belongs to another tape");
  CTGN_REQUIRE(value(root).size() == 1, "backward: loss must be scalar, got shape " +
                                       value(root).shape_string());
  for (auto& n : nodes_) n.grad = Tensor();
  if (!nodes_[root.id()].requires_grad) return;
  grad_buffer(root)[0] = 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (!node.backward || node.grad.empty()) continue;
    // The closure may only touch grad buffers of earlier nodes.
    node.backward(*this, node.grad);
  }
}

}  // namespace ctgn
