#include "ctgn/diff/params.hpp"

#include <cmath>

#include "ctgn/errors.hpp"

namespace ctgn {

Tensor& ParamSet::add(const std::string& name, Tensor init) {
  CTGN_REQUIRE(!contains(name), "duplicate parameter name: " + name);
  index_.emplace(name, entries_.size());
  entries_.emplace_back(name, std::move(init));
  return entries_.back().second;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  CTGN_REQUIRE(it != index_.end(), "unknown parameter: " + name);
  return entries_[it->second].second;
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  CTGN_REQUIRE(it != index_.end(), "unknown parameter: " + name);
  return entries_[it->second].second;
}

void ParamSet::set(const std::string& name, Tensor value) {
  Tensor& slot = at(name);
  CTGN_REQUIRE(slot.same_shape(value), "parameter " + name + ": shape " + value.shape_string() +
                                      " does not match " + slot.shape_string());
  slot = std::move(value);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.size();
  return n;
}

Tensor uniform_fan_in(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor w = Tensor::zeros(fan_in, fan_out);
  for (double& v : w.data()) v = dist(rng);
  return w;
}

ParamVars::ParamVars(Tape& tape, const ParamSet& params, bool requires_grad) : tape_(&tape) {
  vars_.reserve(params.size());
  for (const auto& [name, value] : params) {
    index_.emplace(name, vars_.size());
    vars_.emplace_back(name, tape.leaf(value, requires_grad));
  }
}

Var ParamVars::operator[](const std::string& name) const {
  auto it = index_.find(name);
  CTGN_REQUIRE(it != index_.end(), "unbound parameter: " + name);
  return vars_[it->second].second;
}

NamedTensors ParamVars::grads() const {
  NamedTensors out;
  for (const auto& [name, var] : vars_) out.emplace(name, tape_->grad(var));
  return out;
}

}  // namespace ctgn
