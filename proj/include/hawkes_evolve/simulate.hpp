#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hawkes_evolve/bank.hpp"
#include "hawkes_evolve/errors.hpp"
#include "hawkes_evolve/rng.hpp"
#include "hawkes_evolve/state.hpp"

namespace hawkes_evolve {

enum class Engine { MarkovExact, ThinningHistory };

struct SimConfig {
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // replication index; (seed, stream) names the RNG stream
  Engine engine = Engine::MarkovExact;
  std::uint64_t max_events = 10'000'000;
  std::vector<double> intensity_grid;          // sorted sample times in [0, horizon]
  std::optional<IntensityState> initial_state;  // defaults to the empty population at t = 0
  bool clone_requires_population = false;       // also gate lambda2 by 1{N > 0}
};

struct IntensitySample {
  double t = 0.0;
  Rates lambda{};  // third component gated
  double lambda3_ungated = 0.0;
};

struct SimPath {
  EventLog events;
  IntensityState initial_state;
  IntensityState final_state;
  std::vector<IntensitySample> intensity;
  double horizon = 0.0;
  double zero_occupation_time = 0.0;  // Lebesgue time in [0, horizon] with N = 0
  bool hit_event_cap = false;
};

// Thrown when a path reaches SimConfig::max_events; carries the truncated path.
class ExplosionGuardError : public std::runtime_error {
 public:
  explicit ExplosionGuardError(SimPath path)
      : std::runtime_error("simulation reached the event cap"), path_(std::move(path)) {}
  const SimPath& path() const noexcept { return path_; }

 private:
  SimPath path_;
};

// Superposition split of one accepted event. u in [0, 1).
inline Mark sample_mark(double lambda1, double lambda2, double lambda3, double u) {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !(lambda3 >= 0.0))
    throw DomainError("sample_mark: rates must be >= 0");
  const double total = lambda1 + lambda2 + lambda3;
  if (!(total > 0.0)) throw DomainError("sample_mark: total rate must be > 0");
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("sample_mark: u must lie in [0, 1)");
  const double x = u * total;
  if (x < lambda1) return Mark::Mutant;
  if (x < lambda1 + lambda2) return Mark::Clone;
  if (lambda3 > 0.0) return Mark::Death;
  // rounding pushed x onto the total; never pick a zero-rate mark
  return lambda2 > 0.0 ? Mark::Clone : Mark::Mutant;
}

struct NoObserver {
  void operator()(const Event&, const IntensityState&) const noexcept {}
};

namespace detail {

inline void validate_config(const SimConfig& c) {
  if (!(c.horizon > 0.0)) throw DomainError("SimConfig: horizon must be > 0");
  if (c.max_events == 0) throw DomainError("SimConfig: max_events must be > 0");
  for (std::size_t g = 0; g < c.intensity_grid.size(); ++g) {
    const double t = c.intensity_grid[g];
    if (!(t >= 0.0 && t <= c.horizon)) throw DomainError("SimConfig: intensity grid outside [0, horizon]");
    if (g > 0 && t < c.intensity_grid[g - 1]) throw DomainError("SimConfig: intensity grid must be sorted");
  }
}

inline Rates gated(const Rates& raw, std::int64_t population, bool gate_clone) {
  const bool open = population > 0;
  return {raw[0], gate_clone && !open ? 0.0 : raw[1], open ? raw[2] : 0.0};
}

inline double sum(const Rates& r) { return r[0] + r[1] + r[2]; }

// Shared event loop. `raw_at(t)` returns ungated (lambda1, lambda2, lambda3)
// at time t >= the last event, given no further events; `jump(mark, t)`
// records an accepted event. Rates must be non-increasing between events.
// Returns false when the event cap stopped the path early.
template <class RawAt, class Jump>
bool thinning_loop(const SimConfig& cfg, SimPath& path, CounterRng& rng, RawAt&& raw_at, Jump&& jump) {
  double t = 0.0;
  std::size_t g = 0;
  const auto& grid = cfg.intensity_grid;
  auto counts = [&] { return path.events.counts(); };
  auto record_until = [&](double limit, bool inclusive) {
    while (g < grid.size() && (grid[g] < limit || (inclusive && grid[g] <= limit))) {
      const Rates raw = raw_at(grid[g]);
      path.intensity.push_back({grid[g], gated(raw, population_size(counts()), cfg.clone_requires_population), raw[2]});
      ++g;
    }
  };
  Rates current = gated(raw_at(0.0), population_size(counts()), cfg.clone_requires_population);
  for (;;) {
    const double bound = sum(current);
    const double candidate = t + rng.exponential(bound);
    const bool empty = population_size(counts()) == 0;
    if (candidate > cfg.horizon) {
      record_until(cfg.horizon, true);
      if (empty) path.zero_occupation_time += cfg.horizon - t;
      return true;
    }
    record_until(candidate, false);
    if (empty) path.zero_occupation_time += candidate - t;
    t = candidate;
    current = gated(raw_at(t), population_size(counts()), cfg.clone_requires_population);
    if (rng.uniform() * bound < sum(current)) {
      const Mark mark = sample_mark(current[0], current[1], current[2], rng.uniform());
      jump(mark, t);
      if (path.events.size() >= cfg.max_events) {
        record_until(t, true);
        path.hit_event_cap = true;
        return false;
      }
      current = gated(raw_at(t), population_size(counts()), cfg.clone_requires_population);
    }
  }
}

}  // namespace detail

// Exact simulation through the Markov state (xi, n). Between events every
// intensity decays towards its baseline, so the total rate right after the
// last event or rejection dominates the rest of the waiting time.
template <class Observer = NoObserver>
SimPath simulate_markov(const KernelBank& bank, const SimConfig& cfg, Observer&& observer = {}) {
  detail::validate_config(cfg);
  if (!is_markov_admissible(bank).exact_markov())
    throw UnsupportedError("simulate_markov: bank needs exponential kernels with delta = 0");
  const ExponentialKernels k = *bank.exponential();
  CounterRng rng(cfg.seed, cfg.stream);

  SimPath path;
  path.horizon = cfg.horizon;
  IntensityState s = cfg.initial_state.value_or(IntensityState{});
  s.clock = 0.0;
  path.initial_state = s;
  path.events = EventLog(s.counts);
  path.intensity.reserve(cfg.intensity_grid.size());

  const auto& base = bank.base_rates();
  auto raw_at = [&](double t) {
    const IntensityState p = propagate(s, t - s.clock, k);
    return Rates{base[0] + p.xi[0], base[1] + p.xi[1], base[2] + p.xi[2]};
  };
  auto jump = [&](Mark mark, double t) {
    s = propagate(s, t - s.clock, k);
    s.clock = t;  // exact, so later raw_at(t) sees dt = 0
    observer(Event{t, mark}, s);
    s = apply_jump(s, mark, k);
    path.events.append(Event{t, mark});
  };
  if (!detail::thinning_loop(cfg, path, rng, raw_at, jump)) {
    path.final_state = s;
    throw ExplosionGuardError(std::move(path));
  }
  path.final_state = propagate(s, cfg.horizon - s.clock, k);
  return path;
}

// Ogata-style thinning with intensities summed over the full history.
// Needs every kernel declared non-increasing; O(history) per candidate.
template <class Observer = NoObserver>
SimPath simulate_thinning_general(const KernelBank& bank, const SimConfig& cfg, Observer&& observer = {}) {
  detail::validate_config(cfg);
  if (!bank.all_non_increasing())
    throw UnsupportedError("simulate_thinning_general: every kernel must be non-increasing");
  if (bank.any_offset()) throw UnsupportedError("simulate_thinning_general: delta > 0 kernels explode");
  IntensityState start = cfg.initial_state.value_or(IntensityState{});
  if (start.xi != std::array<double, 3>{})
    throw UnsupportedError("simulate_thinning_general: cannot start from non-zero shot noise");
  start.clock = 0.0;

  const Kernel phi[2][2] = {{bank.birth_kernel(0, 0), bank.birth_kernel(0, 1)},
                            {bank.birth_kernel(1, 0), bank.birth_kernel(1, 1)}};
  const Kernel psi = bank.death_kernel();
  const auto& base = bank.base_rates();
  CounterRng rng(cfg.seed, cfg.stream);

  SimPath path;
  path.horizon = cfg.horizon;
  path.initial_state = start;
  path.events = EventLog(start.counts);

  auto xi_at = [&](double t) {
    std::array<double, 3> xi{};
    for (const auto& e : path.events.events()) {
      const double age = t - e.time;
      if (e.mark == Mark::Death) {
        xi[2] += kernel_eval(psi, age);
      } else {
        const std::size_t j = slot(e.mark);
        xi[0] += kernel_eval(phi[j][0], age);
        xi[1] += kernel_eval(phi[j][1], age);
      }
    }
    return xi;
  };
  auto raw_at = [&](double t) {
    const auto xi = xi_at(t);
    return Rates{base[0] + xi[0], base[1] + xi[1], base[2] + xi[2]};
  };
  auto jump = [&](Mark mark, double t) {
    observer(Event{t, mark}, IntensityState{xi_at(t), path.events.counts(), t});
    path.events.append(Event{t, mark});
  };
  if (!detail::thinning_loop(cfg, path, rng, raw_at, jump)) {
    const double last = path.events.events().back().time;
    path.final_state = IntensityState{xi_at(last), path.events.counts(), last};
    throw ExplosionGuardError(std::move(path));
  }
  path.final_state = IntensityState{xi_at(cfg.horizon), path.events.counts(), cfg.horizon};
  return path;
}

template <class Observer = NoObserver>
SimPath simulate(const KernelBank& bank, const SimConfig& cfg, Observer&& observer = {}) {
  if (cfg.engine == Engine::MarkovExact) return simulate_markov(bank, cfg, std::forward<Observer>(observer));
  return simulate_thinning_general(bank, cfg, std::forward<Observer>(observer));
}

// Compensator increments between successive events of process `index`
// (1, 2 or 3), replayed under `bank`, which may differ from the bank that
// generated the path. Unit-exponential i.i.d. when the bank is correct.
// The censored stretch after the last event is dropped.
inline std::vector<double> time_rescale_residuals(const SimPath& path, const KernelBank& bank, int index) {
  if (index < 1 || index > 3) throw DomainError("time_rescale_residuals: index out of range");
  if (!is_markov_admissible(bank).exact_markov())
    throw UnsupportedError("time_rescale_residuals: needs exponential kernels with delta = 0");
  const ExponentialKernels k = *bank.exponential();
  const std::size_t target = static_cast<std::size_t>(index - 1);
  const double base = bank.base_rate(target);
  const double beta = target < 2 ? k.beta[target] : k.death.beta;

  std::vector<double> out;
  IntensityState s = path.initial_state;
  double accumulated = 0.0;
  double t = 0.0;
  for (const auto& e : path.events.events()) {
    const double dt = e.time - t;
    double piece = base * dt + s.xi[target] * (-std::expm1(-beta * dt)) / beta;
    if (target == 2 && s.population() <= 0) piece = 0.0;
    accumulated += piece;
    s = propagate(s, dt, k);
    if (slot(e.mark) == target) {
      out.push_back(accumulated);
      accumulated = 0.0;
    }
    s = apply_jump(s, e.mark, k);
    t = e.time;
  }
  return out;
}

}  // namespace hawkes_evolve
