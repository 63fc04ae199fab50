#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ctgn/diff/params.hpp"

namespace ctgn {

// A scalar-valued computation over bound parameters.
using LossFn = std::function<Var(Tape&, const ParamVars&)>;

// Reverse-mode gradient of `loss` w.r.t. every parameter. Parameters the
// computation never touches get zero tensors.
NamedTensors grad(const LossFn& loss, const ParamSet& params);

// Forward value only (parameters bound as constants).
double evaluate_loss(const LossFn& loss, const ParamSet& params);

struct GradCheckOptions {
  double step = 1e-5;        // central-difference half width
  double tolerance = 1e-4;   // max relative error to pass
  // Relative error per entry is |a - n| / max(|a|, |n|, abs_floor); the floor
  // keeps entries whose true gradient is ~0 from reporting noise.
  double abs_floor = 1e-6;
};

struct ParamCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t entries = 0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double max_rel_error = 0.0;
  bool passed = true;
};

// Compares analytic gradients against central differences.
GradCheckReport grad_check(const LossFn& loss, const ParamSet& params,
                           const GradCheckOptions& options = {});
// Same, but with caller-supplied analytic gradients (used to validate the
// checker itself against deliberately wrong gradients).
GradCheckReport grad_check(const LossFn& loss, const ParamSet& params,
                           const NamedTensors& analytic, const GradCheckOptions& options = {});

}  // namespace ctgn
