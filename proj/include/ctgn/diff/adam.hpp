#pragma once

#include <cstdint>

#include "ctgn/diff/params.hpp"

namespace ctgn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimState {
  NamedTensors first_moment;
  NamedTensors second_moment;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update. Every parameter needs a gradient of the
// same shape; moments are created lazily on the first step.
void adam_step(ParamSet& params, const NamedTensors& grads, OptimState& state,
               const AdamConfig& config = {});

}  // namespace ctgn
