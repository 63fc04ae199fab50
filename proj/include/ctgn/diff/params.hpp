#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctgn/diff/tape.hpp"
#include "ctgn/diff/tensor.hpp"

namespace ctgn {

using NamedTensors = std::map<std::string, Tensor>;

// Named trainable tensors. Iteration follows insertion order, so two sets
// built by the same construction sequence iterate identically.
class ParamSet {
 public:
  Tensor& add(const std::string& name, Tensor init);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);
  // Replaces a value; the shape must not change.
  void set(const std::string& name, Tensor value);

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  friend bool operator==(const ParamSet& a, const ParamSet& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for a fan_in x fan_out matrix.
Tensor uniform_fan_in(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

// A ParamSet bound to a tape: one leaf per parameter.
class ParamVars {
 public:
  ParamVars(Tape& tape, const ParamSet& params, bool requires_grad = true);

  Var operator[](const std::string& name) const;
  Tape& tape() const { return *tape_; }
  NamedTensors grads() const;

 private:
  Tape* tape_;
  std::vector<std::pair<std::string, Var>> vars_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace ctgn
