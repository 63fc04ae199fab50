#include "ctgn/diff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ctgn/errors.hpp"

namespace ctgn {
namespace {

Var run(const LossFn& loss, Tape& tape, const ParamVars& vars) {
  Var out = loss(tape, vars);
  CTGN_REQUIRE(out.valid() && out.value().size() == 1,
          "loss computation must reduce to a scalar, got shape " +
              (out.valid() ? out.value().shape_string() : std::string("<unbound>")));
  return out;
}

}  // namespace

NamedTensors grad(const LossFn& loss, const ParamSet& params) {
  Tape tape;
  ParamVars vars(tape, params, true);
  tape.backward(run(loss, tape, vars));
  return vars.grads();
}

double evaluate_loss(const LossFn& loss, const ParamSet& params) {
  Tape tape;
  ParamVars vars(tape, params, false);
  return run(loss, tape, vars).value().item();
}

GradCheckReport grad_check(const LossFn& loss, const ParamSet& params,
                           const GradCheckOptions& options) {
  return grad_check(loss, params, grad(loss, params), options);
}

GradCheckReport grad_check(const LossFn& loss, const ParamSet& params,
                           const NamedTensors& analytic, const GradCheckOptions& options) {
  GradCheckReport report;
  ParamSet probe = params;
  for (const auto& [name, value] : params) {
    auto it = analytic.find(name);
    CTGN_REQUIRE(it != analytic.end() && it->second.same_shape(value),
            "grad_check: analytic gradient missing or misshaped for " + name);
    ParamCheck check{name, 0.0, value.size(), true};
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double orig = value[i];
      probe.at(name)[i] = orig + options.step;
      const double up = evaluate_loss(loss, probe);
      probe.at(name)[i] = orig - options.step;
      const double down = evaluate_loss(loss, probe);
      probe.at(name)[i] = orig;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = it->second[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      check.max_rel_error = std::max(check.max_rel_error, std::abs(a - numeric) / denom);
    }
    check.passed = check.max_rel_error < options.tolerance;
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.passed = report.passed && check.passed;
    report.params.push_back(std::move(check));
  }
  return report;
}

}  // namespace ctgn
