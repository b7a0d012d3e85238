#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hawkes_evolve/state.hpp"

using namespace hawkes_evolve;

namespace {

ExponentialKernels kernels(double delta = 0.0) {
  ExponentialKernels k;
  k.beta = {2.0, 0.7};
  k.alpha = {{{0.5, 0.2}, {0.3, 0.4}}};
  k.delta = {{{delta, 0.0}, {0.0, delta}}};
  k.death = ExpKernel(0.4, 1.3, delta);
  return k;
}

// Sum of phi_{mark, i}(t - tau) written out from the kernel formula.
std::array<double, 3> direct_sums(const ExponentialKernels& k, const std::vector<Event>& events, double t) {
  std::array<double, 3> xi{};
  for (const auto& e : events) {
    if (e.time > t) break;
    const double age = t - e.time;
    if (e.mark == Mark::Death) {
      xi[2] += k.death.delta + k.death.alpha * std::exp(-k.death.beta * age);
    } else {
      const std::size_t j = e.mark == Mark::Mutant ? 0 : 1;
      for (std::size_t i = 0; i < 2; ++i) xi[i] += k.delta[j][i] + k.alpha[j][i] * std::exp(-k.beta[i] * age);
    }
  }
  return xi;
}

}  // namespace

TEST(EventLog, CountsAndPopulation) {
  EventLog log;
  log.append({0.5, Mark::Mutant});
  log.append({0.7, Mark::Clone});
  log.append({1.0, Mark::Death});
  EXPECT_EQ(log.counts(), (Counts{1, 1, 1}));
  EXPECT_EQ(log.population(), 1);
  EXPECT_EQ(log.counts_at(0.7), (Counts{1, 1, 0}));
  EXPECT_EQ(log.counts_at(0.1), (Counts{0, 0, 0}));
  EXPECT_TRUE(log.starts_with_mutant());
}

TEST(EventLog, RejectsNonIncreasingTimes) {
  EventLog log;
  log.append({1.0, Mark::Mutant});
  EXPECT_THROW(log.append({1.0, Mark::Clone}), DomainError);
  EXPECT_THROW(log.append({0.5, Mark::Clone}), DomainError);
  EXPECT_THROW(log.append({-1.0, Mark::Clone}), DomainError);
}

TEST(EventLog, DeathOnEmptyPopulationIsPreconditionViolation) {
  EventLog log;
  EXPECT_THROW(log.append({0.1, Mark::Death}), PreconditionViolation);
  log.append({0.2, Mark::Mutant});
  log.append({0.3, Mark::Death});
  EXPECT_THROW(log.append({0.4, Mark::Death}), PreconditionViolation);
}

TEST(EventLog, InitialCounts) {
  EXPECT_THROW(EventLog(Counts{1, 0, 2}), DomainError);
  EventLog log(Counts{2, 1, 1});
  log.append({0.1, Mark::Death});
  log.append({0.2, Mark::Death});
  EXPECT_EQ(log.population(), 0);
}

TEST(Intensities, EmptyStateClosesGate) {
  const KernelBank bank({1.0, 2.0, 3.0}, kernels());
  const auto r = intensities_at(bank, IntensityState{});
  EXPECT_EQ(r, (Rates{1.0, 2.0, 0.0}));
}

TEST(Intensities, OpenGateAddsShotNoise) {
  const KernelBank bank({1.0, 2.0, 3.0}, kernels());
  const IntensityState s{{0.3, 0.0, 0.5}, {1, 0, 0}, 0.0};
  const auto r = intensities_at(bank, s);
  EXPECT_DOUBLE_EQ(r[0], 1.3);
  EXPECT_DOUBLE_EQ(r[1], 2.0);
  EXPECT_DOUBLE_EQ(r[2], 3.5);
}

TEST(Intensities, GateClosedWhenBirthsEqualDeaths) {
  const KernelBank bank({1.0, 2.0, 3.0}, kernels());
  const IntensityState s{{0.3, 0.1, 9.0}, {2, 1, 3}, 0.0};
  EXPECT_EQ(intensities_at(bank, s)[2], 0.0);
  EXPECT_EQ(death_intensity_ungated(bank, s), 12.0);
}

TEST(Propagate, ZeroStepIsIdentity) {
  const IntensityState s{{0.3, 0.2, 0.5}, {3, 1, 2}, 4.0};
  EXPECT_EQ(propagate(s, 0.0, kernels()), s);
}

TEST(Propagate, ExponentialDecay) {
  ExponentialKernels k = kernels();
  k.beta[0] = 2.0;
  const IntensityState s{{1.0, 0.0, 0.0}, {1, 0, 0}, 0.0};
  EXPECT_NEAR(propagate(s, std::log(2.0), k).xi[0], 0.25, 1e-15);
}

TEST(Propagate, NegativeStepIsDomainError) {
  EXPECT_THROW(propagate(IntensityState{}, -0.1, kernels()), DomainError);
}

TEST(Propagate, GeneralBankIsUnsupported) {
  GeneralKernels g;
  for (auto& row : g.birth)
    for (auto& k : row) k = GeneralKernel::make([](double t) { return 0.1 / (1 + t * t); }, true);
  g.death = ExpKernel(0.1, 1.0);
  const KernelBank bank({1, 1, 1}, g);
  EXPECT_THROW(propagate(IntensityState{}, 1.0, bank), UnsupportedError);
  EXPECT_THROW(apply_jump(IntensityState{}, Mark::Mutant, bank), UnsupportedError);
}

TEST(Propagate, Semigroup) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (double delta : {0.0, 0.15}) {
    const auto k = kernels(delta);
    for (int rep = 0; rep < 200; ++rep) {
      const IntensityState s{{u(gen), u(gen), u(gen)}, {5, 2, 3}, 0.0};
      const double a = u(gen), b = u(gen);
      const auto two = propagate(propagate(s, a, k), b, k);
      const auto one = propagate(s, a + b, k);
      for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(two.xi[i], one.xi[i], 1e-12 * std::max(1.0, one.xi[i]));
    }
  }
}

TEST(ApplyJump, MutantAddsFirstRowOfAlpha) {
  ExponentialKernels k;
  k.alpha[0][0] = 0.5;
  k.alpha[0][1] = 0.2;
  const auto s = apply_jump(IntensityState{}, Mark::Mutant, k);
  EXPECT_EQ(s.xi, (std::array<double, 3>{0.5, 0.2, 0.0}));
  EXPECT_EQ(s.counts, (Counts{1, 0, 0}));
}

TEST(ApplyJump, DeathAddsAlpha3) {
  ExponentialKernels k;
  k.death = ExpKernel(0.4, 1.0);
  const auto s = apply_jump(IntensityState{{}, {1, 0, 0}, 0.0}, Mark::Death, k);
  EXPECT_DOUBLE_EQ(s.xi[2], 0.4);
  EXPECT_EQ(s.counts, (Counts{1, 0, 1}));
}

TEST(ApplyJump, CloneLeavesDeathShotNoise) {
  const IntensityState s{{0.1, 0.2, 0.7}, {1, 0, 0}, 0.0};
  const auto after = apply_jump(s, Mark::Clone, kernels());
  EXPECT_EQ(after.xi[2], 0.7);
  EXPECT_EQ(after.counts, (Counts{1, 1, 0}));
}

TEST(ApplyJump, DeathOnEmptyIsPreconditionViolation) {
  EXPECT_THROW(apply_jump(IntensityState{}, Mark::Death, kernels()), PreconditionViolation);
}

TEST(ApplyJump, ExactlyOneCounterMoves) {
  const IntensityState s{{}, {2, 2, 1}, 0.0};
  for (Mark m : {Mark::Mutant, Mark::Clone, Mark::Death}) {
    const auto after = apply_jump(s, m, kernels());
    int moved = 0;
    for (std::size_t i = 0; i < 3; ++i) moved += after.counts[i] - s.counts[i];
    EXPECT_EQ(moved, 1);
    EXPECT_EQ(after.counts[slot(m)], s.counts[slot(m)] + 1);
  }
}

TEST(Reconstruction, ReplayMatchesDirectSums) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> gap(0.01, 0.8);
  std::uniform_int_distribution<int> pick(0, 2);
  for (double delta : {0.0, 0.05}) {
    const auto k = kernels(delta);
    const KernelBank bank({1, 1, 1}, k);
    for (int rep = 0; rep < 20; ++rep) {
      EventLog log;
      std::vector<Event> events;
      double t = 0.0;
      for (int n = 0; n < 60; ++n) {
        t += gap(gen);
        Mark m = static_cast<Mark>(pick(gen) + 1);
        if (m == Mark::Death && log.population() == 0) m = Mark::Mutant;
        log.append({t, m});
        events.push_back({t, m});
      }
      IntensityState s;
      for (const auto& e : events) {
        s = propagate(s, e.time - s.clock, k);
        s = apply_jump(s, e.mark, k);
      }
      const double query = t + 0.37;
      s = propagate(s, query - s.clock, k);
      const auto oracle = direct_sums(k, events, query);
      const auto history = shot_noise_from_history(bank, log, query);
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(s.xi[i], oracle[i], 1e-9 * std::max(1.0, oracle[i]));
        EXPECT_NEAR(history[i], oracle[i], 1e-12 * std::max(1.0, oracle[i]));
      }
    }
  }
}
