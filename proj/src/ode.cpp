#include "ctgn/ode.hpp"

#include <algorithm>
#include <cmath>

#include "ctgn/diff/layers.hpp"
#include "ctgn/errors.hpp"

namespace ctgn {

using namespace ctgn::ops;

SolverMethod parse_solver_method(const std::string& name) {
  if (name == "euler") return SolverMethod::kEuler;
  if (name == "rk4") return SolverMethod::kRk4;
  if (name == "adaptive" || name == "dopri5") return SolverMethod::kAdaptive;
  throw DataError("unknown solver method '" + name + "' (expected euler, rk4 or adaptive)");
}

std::string to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::kEuler: return "euler";
    case SolverMethod::kRk4: return "rk4";
    case SolverMethod::kAdaptive: return "adaptive";
  }
  return "?";
}

void SolverConfig::validate() const {
  CTGN_REQUIRE(steps >= 1, "solver step count must be at least 1");
  CTGN_REQUIRE(rtol > 0 && atol > 0, "solver tolerances must be positive");
  CTGN_REQUIRE(max_steps >= 1, "solver max_steps must be at least 1");
}

namespace {

struct Scaled {
  Tape* tape;
  const OdeField* f;
  Var horizon;  // rows x 1
  const Tensor* t_end;
  std::size_t* evals;

  // dz/ds at rescaled time s.
  Var operator()(Var z, double s) const {
    Tensor tau = *t_end;
    for (auto& x : tau.data()) x *= s;
    ++*evals;
    return scale_rows((*f)(z, tape->constant(std::move(tau))), horizon);
  }
};

Var checked(Var z, std::size_t step) {
  if (!z.value().all_finite())
    throw NumericError("ode_solve: non-finite state at step " + std::to_string(step));
  return z;
}

Var fixed_step(const Scaled& g, Var z, const SolverConfig& cfg) {
  const double h = 1.0 / static_cast<double>(cfg.steps);
  for (std::size_t i = 0; i < cfg.steps; ++i) {
    const double s = static_cast<double>(i) * h;
    if (cfg.method == SolverMethod::kEuler) {
      z = checked(z + scale(g(z, s), h), i + 1);
      continue;
    }
    Var k1 = g(z, s);
    Var k2 = g(z + scale(k1, h / 2), s + h / 2);
    Var k3 = g(z + scale(k2, h / 2), s + h / 2);
    Var k4 = g(z + scale(k3, h), s + h);
    z = checked(z + scale(k1 + scale(k2, 2.0) + scale(k3, 2.0) + k4, h / 6), i + 1);
  }
  return z;
}

// Dormand-Prince 5(4) with a standard PI-free step controller.
Var adaptive(const Scaled& g, Var z, const SolverConfig& cfg) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double s = 0.0;
  double h = 0.1;
  std::size_t accepted = 0, attempts = 0;
  Var k1 = g(z, s);
  while (s < 1.0) {
    if (++attempts > cfg.max_steps)
      throw NumericError("ode_solve: adaptive solver exceeded max_steps=" +
                         std::to_string(cfg.max_steps) + " at s=" + std::to_string(s));
    h = std::min(h, 1.0 - s);
    Var k2 = g(z + scale(k1, h * a21), s + c2 * h);
    Var k3 = g(z + scale(k1, h * a31) + scale(k2, h * a32), s + c3 * h);
    Var k4 = g(z + scale(k1, h * a41) + scale(k2, h * a42) + scale(k3, h * a43), s + c4 * h);
    Var k5 = g(z + scale(k1, h * a51) + scale(k2, h * a52) + scale(k3, h * a53) +
                   scale(k4, h * a54),
               s + c5 * h);
    Var k6 = g(z + scale(k1, h * a61) + scale(k2, h * a62) + scale(k3, h * a63) +
                   scale(k4, h * a64) + scale(k5, h * a65),
               s + h);
    Var next = z + scale(k1, h * b1) + scale(k3, h * b3) + scale(k4, h * b4) +
               scale(k5, h * b5) + scale(k6, h * b6);
    checked(next, accepted + 1);
    Var k7 = g(next, s + h);

    const auto& y0 = z.value().data();
    const auto& y1 = next.value().data();
    double err = 0.0;
    for (std::size_t i = 0; i < y0.size(); ++i) {
      const double e = h * (e1 * k1.value()[i] + e3 * k3.value()[i] + e4 * k4.value()[i] +
                            e5 * k5.value()[i] + e6 * k6.value()[i] + e7 * k7.value()[i]);
      const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (!std::isfinite(err))
      throw NumericError("ode_solve: non-finite error estimate at step " +
                         std::to_string(accepted + 1));
    if (err <= 1.0) {
      s += h;
      z = next;
      k1 = k7;
      ++accepted;
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
  }
  return z;
}

}  // namespace

Var ode_solve(Tape& tape, const OdeField& f, Var z0, std::span<const double> t_end,
              const SolverConfig& config) {
  config.validate();
  CTGN_REQUIRE(t_end.size() == z0.rows(), "ode_solve: one horizon per state row");
  CTGN_REQUIRE(z0.value().all_finite(), "ode_solve: initial state must be finite");
  bool any = false;
  for (double t : t_end) {
    CTGN_REQUIRE(std::isfinite(t) && t >= 0.0, "ode_solve: horizons must be finite and >= 0");
    any = any || t > 0.0;
  }
  if (!any) return z0;

  Tensor horizon = Tensor::column(std::vector<double>(t_end.begin(), t_end.end()));
  std::size_t evals = 0;
  const Scaled g{&tape, &f, tape.constant(horizon), &horizon, &evals};
  Var z = config.method == SolverMethod::kAdaptive ? adaptive(g, z0, config)
                                                   : fixed_step(g, z0, config);
  // Zero-horizon rows pass through untouched.
  std::vector<std::ptrdiff_t> pick(t_end.size());
  bool mixed = false;
  for (std::size_t r = 0; r < t_end.size(); ++r) {
    pick[r] = static_cast<std::ptrdiff_t>(t_end[r] > 0.0 ? t_end.size() + r : r);
    mixed = mixed || t_end[r] == 0.0;
  }
  if (!mixed) return z;
  const std::vector<Var> both{z0, z};
  return gather_rows(concat_rows(both), pick);
}

DurationStats duration_stats(const EventStore& train, double t_max) {
  DurationStats stats;
  stats.t_max = t_max;
  double total = 0.0;
  std::size_t n = 0;
  if (train.has_duration()) {
    for (const auto& e : train.events()) total += e.duration;
    n = train.size();
  } else {
    std::vector<double> last(train.num_nodes(), -1.0);
    for (const auto& e : train.events()) {
      for (NodeId v : {e.src, e.dst}) {
        if (last[v] >= 0.0) {
          total += e.t - last[v];
          ++n;
        }
        last[v] = e.t;
        if (e.src == e.dst) break;
      }
    }
  }
  if (n > 0 && total > 0.0) stats.mean = total / static_cast<double>(n);
  return stats;
}

double normalize_duration(double raw, const DurationStats& stats) {
  CTGN_REQUIRE(std::isfinite(raw) && raw >= 0.0, "normalize_duration: duration must be >= 0");
  CTGN_REQUIRE(stats.mean > 0.0, "normalize_duration: mean duration must be positive");
  return std::min(raw / stats.mean, stats.t_max);
}

void OdeFunc::add_params(ParamSet& params, std::mt19937_64& rng) const {
  nn::add_linear(params, prefix + "/l1", dim + 1, hidden, rng);
  nn::add_linear(params, prefix + "/l2", hidden, hidden, rng);
  nn::add_linear(params, prefix + "/l3", hidden, dim, rng);
}

OdeField OdeFunc::bind(const ParamVars& p) const {
  return [this, &p](Var z, Var tau) {
    const std::vector<Var> in{z, tau};
    Var x = tanh(nn::linear(p, prefix + "/l1", concat_cols(in)));
    x = tanh(nn::linear(p, prefix + "/l2", x));
    return nn::linear(p, prefix + "/l3", x);
  };
}

Var evolve_embedding(const ParamVars& p, const OdeFunc& func, Var h,
                     std::span<const double> raw_durations, const SolverConfig& config,
                     const DurationStats& stats, bool duration_blind) {
  CTGN_REQUIRE(raw_durations.size() == h.rows(), "evolve_embedding: one duration per row");
  std::vector<double> tau(raw_durations.size(), 0.0);
  if (!duration_blind)
    for (std::size_t i = 0; i < tau.size(); ++i) tau[i] = normalize_duration(raw_durations[i], stats);
  return ode_solve(p.tape(), func.bind(p), h, tau, config);
}

}  // namespace ctgn
