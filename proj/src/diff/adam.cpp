#include "ctgn/diff/adam.hpp"

#include <cmath>

#include "ctgn/errors.hpp"

namespace ctgn {

void adam_step(ParamSet& params, const NamedTensors& grads, OptimState& state,
               const AdamConfig& config) {
  for (const auto& [name, value] : params) {
    auto it = grads.find(name);
    CTGN_REQUIRE(it != grads.end(), "adam_step: missing gradient for " + name);
    CTGN_REQUIRE(it->second.same_shape(value), "adam_step: gradient shape " +
                                              it->second.shape_string() + " for " + name +
                                              " does not match " + value.shape_string());
  }
  const auto step = state.step + 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (auto& [name, value] : params) {
    const Tensor& g = grads.at(name);
    auto [m_it, m_new] = state.first_moment.try_emplace(name, value.shape(), 0.0);
    auto [v_it, v_new] = state.second_moment.try_emplace(name, value.shape(), 0.0);
    auto p = value.data();
    auto m = m_it->second.data();
    auto v = v_it->second.data();
    auto gs = g.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * gs[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * gs[i] * gs[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
  state.step = step;
}

}  // namespace ctgn
