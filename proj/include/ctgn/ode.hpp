#pragma once

#include <functional>
#include <random>
#include <span>
#include <string>

#include "ctgn/diff/params.hpp"
#include "ctgn/graph/event_store.hpp"

namespace ctgn {

enum class SolverMethod { kEuler, kRk4, kAdaptive };

SolverMethod parse_solver_method(const std::string& name);
std::string to_string(SolverMethod method);

struct SolverConfig {
  SolverMethod method = SolverMethod::kRk4;
  std::size_t steps = 8;  // fixed-step methods
  double rtol = 1e-5;     // adaptive
  double atol = 1e-7;
  std::size_t max_steps = 1000;

  void validate() const;
};

// dz/dtau for a batch of states; `tau` holds each row's current time.
using OdeField = std::function<Var(Var z, Var tau)>;

// Integrates every row of z0 from 0 to its own horizon t_end[r]. Rows are
// solved jointly on the rescaled interval s in [0, 1] with
// dz/ds = t_end * f(z, s * t_end), so fixed-step methods take `steps`
// equal steps of t_end / steps per row. Rows with t_end = 0 return z0
// exactly.
Var ode_solve(Tape& tape, const OdeField& f, Var z0, std::span<const double> t_end,
              const SolverConfig& config);

struct DurationStats {
  double mean = 1.0;
  double t_max = 2.0;
};

// Mean event duration, or mean gap t - t_prev per endpoint in
// contact-sequence mode (first contacts excluded). Falls back to 1 when
// there is nothing to average.
DurationStats duration_stats(const EventStore& train, double t_max = 2.0);

double normalize_duration(double raw, const DurationStats& stats);

// Derivative MLP [z || tau] -> tanh -> tanh -> dim.
struct OdeFunc {
  std::string prefix = "ode";
  std::size_t dim = 172;
  std::size_t hidden = 172;

  void add_params(ParamSet& params, std::mt19937_64& rng) const;
  OdeField bind(const ParamVars& p) const;
};

// z = ode_solve(f, h, normalize_duration(raw)) row-wise. With
// `duration_blind` every horizon is 0 and z = h.
Var evolve_embedding(const ParamVars& p, const OdeFunc& func, Var h,
                     std::span<const double> raw_durations, const SolverConfig& config,
                     const DurationStats& stats, bool duration_blind = false);

}  // namespace ctgn
