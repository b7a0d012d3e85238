#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hawkes_evolve/bank.hpp"
#include "hawkes_evolve/errors.hpp"

namespace hawkes_evolve {

using Counts = std::array<std::int64_t, 3>;

constexpr std::int64_t population_size(const Counts& n) noexcept { return n[0] + n[1] - n[2]; }

struct Event {
  double time = 0.0;
  Mark mark = Mark::Mutant;

  friend bool operator==(const Event&, const Event&) = default;
};

// Realization of (N1, N2, N3): strictly increasing times and a population
// that never goes negative. `initial` holds the counts at time zero for paths
// started from a non-empty state.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(Counts initial) : initial_(initial), counts_(initial) {
    if (initial[0] < 0 || initial[1] < 0 || initial[2] < 0 || population_size(initial) < 0) {
      throw DomainError("EventLog: invalid initial counts");
    }
  }

  void append(const Event& e) {
    if (!(e.time >= 0.0)) throw DomainError("EventLog: event time must be >= 0");
    if (!events_.empty() && !(e.time > events_.back().time)) {
      throw DomainError("EventLog: event times must be strictly increasing");
    }
    if (e.mark == Mark::Death && population_size(counts_) <= 0) {
      throw PreconditionViolation("EventLog: death in an empty population");
    }
    events_.push_back(e);
    ++counts_[slot(e.mark)];
  }

  std::span<const Event> events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  const Counts& initial_counts() const noexcept { return initial_; }
  const Counts& counts() const noexcept { return counts_; }
  std::int64_t population() const noexcept { return population_size(counts_); }

  // Counts including every event with time <= t.
  Counts counts_at(double t) const {
    Counts c = initial_;
    for (const auto& e : events_) {
      if (e.time > t) break;
      ++c[slot(e.mark)];
    }
    return c;
  }

  bool starts_with_mutant() const noexcept {
    return events_.empty() || events_.front().mark == Mark::Mutant;
  }

  void reserve(std::size_t n) { events_.reserve(n); }

  friend bool operator==(const EventLog&, const EventLog&) = default;

 private:
  Counts initial_{};
  Counts counts_{};
  std::vector<Event> events_;
};

// Markov state of the exponential system: shot noise (xi1, xi2, xi3), event
// counts and the time it was last synchronized to.
struct IntensityState {
  std::array<double, 3> xi{};
  Counts counts{};
  double clock = 0.0;

  std::int64_t population() const noexcept { return population_size(counts); }

  friend bool operator==(const IntensityState&, const IntensityState&) = default;
};

// (lambda1, lambda2, lambda3 * 1{N > 0}); xi3 accrues regardless of the gate.
inline Rates intensities_at(const KernelBank& bank, const IntensityState& s) {
  const auto& b = bank.base_rates();
  const bool open = s.population() > 0;
  return {b[0] + s.xi[0], b[1] + s.xi[1], open ? b[2] + s.xi[2] : 0.0};
}

// Ungated third component, lambda0^3 + xi3.
inline double death_intensity_ungated(const KernelBank& bank, const IntensityState& s) {
  return bank.base_rate(2) + s.xi[2];
}

// Exact flow of the shot noise over dt with no events:
// xi_i <- e^{-beta_i dt} xi_i + sum_j delta_ji (1 - e^{-beta_i dt}) n_j.
inline IntensityState propagate(const IntensityState& s, double dt, const ExponentialKernels& k) {
  if (!(dt >= 0.0)) throw DomainError("propagate: dt must be >= 0");
  IntensityState out = s;
  out.clock = s.clock + dt;
  if (dt == 0.0) return out;
  for (std::size_t i = 0; i < 2; ++i) {
    const double decay = std::exp(-k.beta[i] * dt);
    double offset = 0.0;
    for (std::size_t j = 0; j < 2; ++j) offset += k.delta[j][i] * static_cast<double>(s.counts[j]);
    out.xi[i] = decay * s.xi[i] + offset * (-std::expm1(-k.beta[i] * dt));
  }
  const double decay3 = std::exp(-k.death.beta * dt);
  out.xi[2] = decay3 * s.xi[2] +
              k.death.delta * static_cast<double>(s.counts[2]) * (-std::expm1(-k.death.beta * dt));
  return out;
}

inline IntensityState propagate(const IntensityState& s, double dt, const KernelBank& bank) {
  const auto k = bank.exponential();
  if (!k) throw UnsupportedError("propagate: bank is not of exponential Markov form");
  return propagate(s, dt, *k);
}

// Jump of the shot noise at an event: each target receives phi(0) = delta + alpha
// of the kernel from the jumping source.
inline IntensityState apply_jump(const IntensityState& s, Mark mark, const ExponentialKernels& k) {
  IntensityState out = s;
  switch (mark) {
    case Mark::Mutant:
    case Mark::Clone: {
      const std::size_t j = slot(mark);
      out.xi[0] += k.alpha[j][0] + k.delta[j][0];
      out.xi[1] += k.alpha[j][1] + k.delta[j][1];
      break;
    }
    case Mark::Death:
      if (s.population() <= 0) throw PreconditionViolation("apply_jump: death in an empty population");
      out.xi[2] += k.death.alpha + k.death.delta;
      break;
  }
  ++out.counts[slot(mark)];
  return out;
}

inline IntensityState apply_jump(const IntensityState& s, Mark mark, const KernelBank& bank) {
  const auto k = bank.exponential();
  if (!k) throw UnsupportedError("apply_jump: bank is not of exponential Markov form");
  return apply_jump(s, mark, *k);
}

// Direct history sums xi_i(t) = sum_k phi_{mark_k, i}(t - tau_k) over events
// with tau_k <= t. Works for any kernel bank; O(history).
inline std::array<double, 3> shot_noise_from_history(const KernelBank& bank, const EventLog& log,
                                                     double t) {
  std::array<double, 3> xi{};
  const Kernel phi[2][2] = {{bank.birth_kernel(0, 0), bank.birth_kernel(0, 1)},
                            {bank.birth_kernel(1, 0), bank.birth_kernel(1, 1)}};
  const Kernel psi = bank.death_kernel();
  for (const auto& e : log.events()) {
    if (e.time > t) break;
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
}

}  // namespace hawkes_evolve
