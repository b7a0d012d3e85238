#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "hawkes_evolve/bank.hpp"
#include "hawkes_evolve/errors.hpp"
#include "hawkes_evolve/expectations.hpp"
#include "hawkes_evolve/partition.hpp"
#include "hawkes_evolve/rng.hpp"
#include "hawkes_evolve/simulate.hpp"

namespace hawkes_evolve {

enum class Provenance { FreshUniform, CloneOfExisting };

struct SiteSample {
  double fitness = 0.0;
  Provenance provenance = Provenance::FreshUniform;
};

struct SiteDeath {
  double fitness = 0.0;
  bool removed = false;  // the site's last individual died
};

using PopulationOutcome = std::variant<SiteSample, SiteDeath>;

// One population transition. `u` in [0, 1) is the fresh fitness for a mutant
// (and for a clone born into an empty population) or the weighted selector
// for a clone: cumulative counts in fitness order, first exceeding u * N.
inline PopulationOutcome apply_population_event(FitnessPartition& x, Mark mark, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("apply_population_event: u must lie in [0, 1)");
  switch (mark) {
    case Mark::Mutant:
      x.add(u);
      return SiteSample{u, Provenance::FreshUniform};
    case Mark::Clone:
      if (x.empty()) {
        x.add(u);
        return SiteSample{u, Provenance::FreshUniform};
      } else {
        const double site = x.site_by_weight(u);
        x.add(site);
        return SiteSample{site, Provenance::CloneOfExisting};
      }
    case Mark::Death: {
      if (x.empty()) throw PreconditionViolation("apply_population_event: death in an empty population");
      const auto [site, removed] = x.remove_one_at_min();
      return SiteDeath{site, removed};
    }
  }
  throw DomainError("apply_population_event: unknown mark");
}

inline void check_threshold(double f, const char* where) {
  if (!(f >= 0.0 && f <= 1.0)) throw DomainError(std::string(where) + ": f must lie in [0, 1]");
}

// (L, R): individuals with fitness in [0, f] and in (f, 1].
inline std::pair<std::int64_t, std::int64_t> left_right_counts(const FitnessPartition& x, double f) {
  check_threshold(f, "left_right_counts");
  const std::int64_t left = x.count_at_most(f);
  return {left, x.total() - left};
}

// Fraction of occupied sites with fitness <= f; nullopt for an empty partition.
inline std::optional<double> empirical_site_cdf(const FitnessPartition& x, double f) {
  check_threshold(f, "empirical_site_cdf");
  if (x.empty()) return std::nullopt;
  return static_cast<double>(x.sites_at_most(f)) / static_cast<double>(x.site_count());
}

inline double theoretical_site_cdf(double f, double fc) {
  check_threshold(f, "theoretical_site_cdf");
  if (!(fc < 1.0)) throw DomainError("theoretical_site_cdf: f_c must be < 1");
  return std::max(f - fc, 0.0) / (1.0 - fc);
}

struct LRPoint {
  double t = 0.0;
  std::int64_t left = 0;
  std::int64_t right = 0;

  std::int64_t total() const noexcept { return left + right; }
};

struct PartitionSnapshot {
  double t = 0.0;
  std::vector<FitnessPartition::Site> sites;
};

struct PopulationOptions {
  double f = 0.5;
  std::vector<double> snapshot_grid;  // sorted, within [0, horizon]
  bool record_lr = true;               // one L/R point per event
};

struct PopulationRun {
  SimPath path;
  FitnessPartition partition;  // at the horizon
  std::vector<PartitionSnapshot> snapshots;
  std::vector<LRPoint> lr;
  double f = 0.5;
  std::int64_t left_zero_returns = 0;  // events after which L dropped to 0
};

namespace detail {

// One uniform per event from a stream split off the engine's stream, so the
// marks are unchanged by attaching a population.
inline CounterRng population_stream(const SimConfig& cfg) { return CounterRng(cfg.seed, cfg.stream).split(1); }

}  // namespace detail

inline PopulationRun simulate_population(const KernelBank& bank, const SimConfig& cfg,
                                         const PopulationOptions& opt = {}) {
  check_threshold(opt.f, "simulate_population");
  for (std::size_t g = 0; g < opt.snapshot_grid.size(); ++g) {
    const double t = opt.snapshot_grid[g];
    if (!(t >= 0.0 && t <= cfg.horizon)) throw DomainError("simulate_population: snapshot outside [0, horizon]");
    if (g > 0 && t < opt.snapshot_grid[g - 1]) throw DomainError("simulate_population: snapshot grid must be sorted");
  }
  if (cfg.initial_state && population_size(cfg.initial_state->counts) != 0)
    throw UnsupportedError("simulate_population: the partition starts empty; initial counts must give N = 0");

  PopulationRun run;
  run.f = opt.f;
  CounterRng rng = detail::population_stream(cfg);
  std::size_t g = 0;
  std::int64_t left = 0;
  auto snap_until = [&](double limit, bool inclusive) {
    while (g < opt.snapshot_grid.size() &&
           (opt.snapshot_grid[g] < limit || (inclusive && opt.snapshot_grid[g] <= limit))) {
      run.snapshots.push_back({opt.snapshot_grid[g], run.partition.sites()});
      ++g;
    }
  };
  auto observer = [&](const Event& e, const IntensityState&) {
    snap_until(e.time, false);
    const double u = rng.uniform();
    const auto outcome = apply_population_event(run.partition, e.mark, u);
    const bool was_positive = left > 0;
    if (const auto* s = std::get_if<SiteSample>(&outcome)) {
      if (s->fitness <= opt.f) ++left;
    } else if (std::get<SiteDeath>(outcome).fitness <= opt.f) {
      --left;
    }
    if (was_positive && left == 0) ++run.left_zero_returns;
    if (opt.record_lr) run.lr.push_back({e.time, left, run.partition.total() - left});
  };
  run.path = simulate(bank, cfg, observer);
  snap_until(cfg.horizon, true);
  return run;
}

// ---------------------------------------------------------------------------
// Modified chain with a fixed clone split eps in the (L > 0, R > 0) case.

struct EpsilonChainRun {
  double f = 0.5;
  double epsilon = 0.0;
  std::vector<LRPoint> lr;  // one point per event
  std::int64_t left = 0;
  std::int64_t right = 0;
  std::int64_t left_zero_returns = 0;
};

// Transition of the modified chain for one event with shared uniform u. The
// thresholds line up with apply_population_event: a mutant lands in L iff
// u <= f, and in the unmodified chain a case-4 clone lands in L iff u < L/N.
inline void epsilon_step(std::int64_t& left, std::int64_t& right, Mark mark, double u, double f, double eps) {
  switch (mark) {
    case Mark::Mutant:
      (u <= f ? left : right) += 1;
      return;
    case Mark::Clone:
      if (left == 0 && right == 0) {
        (u <= f ? left : right) += 1;
      } else if (left == 0) {
        ++right;
      } else if (right == 0) {
        ++left;
      } else {
        (u < eps ? left : right) += 1;
      }
      return;
    case Mark::Death:
      if (left > 0) {
        --left;
      } else if (right > 0) {
        --right;
      } else {
        throw PreconditionViolation("epsilon_step: death in an empty population");
      }
      return;
  }
}

// Runs one modified chain per entry of `epsilons` on a single simulated path
// with shared uniforms; the coupling makes L monotone in eps pathwise.
inline std::vector<EpsilonChainRun> simulate_epsilon_chains(const KernelBank& bank, double f,
                                                            std::span<const double> epsilons,
                                                            const SimConfig& cfg, bool record_lr = true) {
  check_threshold(f, "simulate_epsilon_chain");
  for (double e : epsilons)
    if (!(e >= 0.0 && e <= 1.0)) throw DomainError("simulate_epsilon_chain: eps must lie in [0, 1]");
  if (cfg.initial_state && population_size(cfg.initial_state->counts) != 0)
    throw UnsupportedError("simulate_epsilon_chain: the chain starts empty");

  std::vector<EpsilonChainRun> runs(epsilons.size());
  for (std::size_t k = 0; k < runs.size(); ++k) {
    runs[k].f = f;
    runs[k].epsilon = epsilons[k];
  }
  CounterRng rng = detail::population_stream(cfg);
  auto observer = [&](const Event& e, const IntensityState&) {
    const double u = rng.uniform();
    for (auto& r : runs) {
      const bool was_positive = r.left > 0;
      epsilon_step(r.left, r.right, e.mark, u, f, r.epsilon);
      if (was_positive && r.left == 0) ++r.left_zero_returns;
      if (record_lr) r.lr.push_back({e.time, r.left, r.right});
    }
  };
  simulate(bank, cfg, observer);
  return runs;
}

inline EpsilonChainRun simulate_epsilon_chain(const KernelBank& bank, double f, double eps, const SimConfig& cfg,
                                              bool record_lr = true) {
  const double e[] = {eps};
  return std::move(simulate_epsilon_chains(bank, f, e, cfg, record_lr).front());
}

// lim L/N = (f Lambda1 + eps Lambda2 - Lambda3) / (Lambda1 + Lambda2 - Lambda3).
inline double rho_limit(const KernelBank& bank, double f, double eps, ExpectationMethod method) {
  check_threshold(f, "rho_limit");
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("rho_limit: eps must lie in [0, 1]");
  const Rates lam = asymptotic_rates(bank, method);
  const double growth = lam[0] + lam[1] - lam[2];
  if (!(growth > 0.0)) throw DomainError("rho_limit: needs Lambda1 + Lambda2 > Lambda3");
  return (f * lam[0] + eps * lam[1] - lam[2]) / growth;
}

}  // namespace hawkes_evolve
