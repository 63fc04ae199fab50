#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ctgn/diff/params.hpp"
#include "ctgn/diff/tensor.hpp"

namespace ctgn {

// Flat container of (name, shape, float64 values) triples, a step counter
// and free-form string metadata. The binary encoding stores raw IEEE-754
// doubles, so a write/read round trip is bit-exact.
struct Checkpoint {
  std::uint64_t step = 0;
  std::vector<std::pair<std::string, Tensor>> tensors;
  std::map<std::string, std::string> meta;

  void put(const std::string& name, Tensor value);
  bool has(const std::string& name) const;
  const Tensor& get(const std::string& name) const;

  // Stores every parameter under `prefix + name`.
  void put_params(const std::string& prefix, const ParamSet& params);
  // Overwrites values of `params` from entries under `prefix`; all must exist.
  void load_params(const std::string& prefix, ParamSet& params) const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace ctgn
