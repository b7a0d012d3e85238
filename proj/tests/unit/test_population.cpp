#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hawkes_evolve/population.hpp"

using namespace hawkes_evolve;

namespace {

KernelBank poisson(Rates rates) {
  ExponentialKernels k;
  k.beta = {1.0, 2.0};
  return KernelBank(rates, k);
}

KernelBank hawkes_bank() {
  ExponentialKernels k;
  k.beta = {1.5, 2.0};
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 2; ++i) k.alpha[j][i] = 0.4 * k.beta[i];
  k.death = ExpKernel(0.4, 1.0);
  return KernelBank({1.0, 0.8, 1.2}, k);
}

FitnessPartition make(std::initializer_list<std::pair<std::int64_t, double>> sites) {
  FitnessPartition x;
  for (auto [k, f] : sites) x.add(f, k);
  return x;
}

SimConfig config(double horizon, std::uint64_t seed) {
  SimConfig c;
  c.horizon = horizon;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(PopulationEvent, DeathRemovesSingletonMinimum) {
  auto x = make({{1, 0.2}, {3, 0.7}});
  const auto out = std::get<SiteDeath>(apply_population_event(x, Mark::Death, 0.0));
  EXPECT_EQ(out.fitness, 0.2);
  EXPECT_TRUE(out.removed);
  EXPECT_EQ(x.sites(), (std::vector<FitnessPartition::Site>{{0.7, 3}}));
}

TEST(PopulationEvent, DeathDecrementsMinimum) {
  auto x = make({{2, 0.2}, {3, 0.7}});
  apply_population_event(x, Mark::Death, 0.9);
  EXPECT_EQ(x.sites(), (std::vector<FitnessPartition::Site>{{0.2, 1}, {0.7, 3}}));
}

TEST(PopulationEvent, CloneSamplesByWeight) {
  auto x = make({{1, 0.3}, {3, 0.6}});
  const auto out = std::get<SiteSample>(apply_population_event(x, Mark::Clone, 0.5));
  EXPECT_EQ(out.fitness, 0.6);
  EXPECT_EQ(out.provenance, Provenance::CloneOfExisting);
  EXPECT_EQ(x.count_at(0.6), 4);
  apply_population_event(x, Mark::Clone, 0.1);  // cumulative 1/5 at 0.3
  EXPECT_EQ(x.count_at(0.3), 2);
}

TEST(PopulationEvent, CloneIntoEmptyIsFreshUniform) {
  FitnessPartition x;
  const auto out = std::get<SiteSample>(apply_population_event(x, Mark::Clone, 0.42));
  EXPECT_EQ(out.fitness, 0.42);
  EXPECT_EQ(out.provenance, Provenance::FreshUniform);
  EXPECT_EQ(x.total(), 1);
}

TEST(PopulationEvent, MutantUsesUniform) {
  FitnessPartition x;
  apply_population_event(x, Mark::Mutant, 0.25);
  apply_population_event(x, Mark::Mutant, 0.25);
  EXPECT_EQ(x.count_at(0.25), 2);
  EXPECT_EQ(x.site_count(), 1u);
}

TEST(PopulationEvent, Errors) {
  FitnessPartition x;
  EXPECT_THROW(apply_population_event(x, Mark::Death, 0.5), PreconditionViolation);
  EXPECT_THROW(apply_population_event(x, Mark::Mutant, 1.0), DomainError);
}

TEST(LeftRight, Examples) {
  const auto x = make({{2, 0.2}, {3, 0.7}});
  EXPECT_EQ(left_right_counts(x, 0.5), (std::pair<std::int64_t, std::int64_t>{2, 3}));
  EXPECT_EQ(left_right_counts(FitnessPartition{}, 0.5), (std::pair<std::int64_t, std::int64_t>{0, 0}));
  EXPECT_EQ(left_right_counts(x, 0.2).first, 2);  // boundary site belongs to L
  EXPECT_THROW(left_right_counts(x, 1.5), DomainError);
}

TEST(SiteCdf, Empirical) {
  const auto x = make({{2, 0.2}, {3, 0.7}});
  EXPECT_EQ(empirical_site_cdf(x, 0.5), 0.5);
  EXPECT_EQ(empirical_site_cdf(x, 1.0), 1.0);
  EXPECT_FALSE(empirical_site_cdf(FitnessPartition{}, 0.5).has_value());
}

TEST(SiteCdf, Theoretical) {
  EXPECT_EQ(theoretical_site_cdf(0.3, 0.5), 0.0);
  EXPECT_EQ(theoretical_site_cdf(0.5, 0.5), 0.0);
  EXPECT_EQ(theoretical_site_cdf(0.75, 0.5), 0.5);
  EXPECT_EQ(theoretical_site_cdf(1.0, 0.2), 1.0);
  EXPECT_THROW(theoretical_site_cdf(0.5, 1.0), DomainError);
}

TEST(SimulatePopulation, PartitionTracksEngine) {
  PopulationOptions opt;
  opt.f = 0.4;
  opt.snapshot_grid = {0.0, 10.0, 50.0};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto run = simulate_population(hawkes_bank(), config(50.0, seed), opt);
    const auto& events = run.path.events.events();
    ASSERT_EQ(run.lr.size(), events.size());
    Counts n{};
    for (std::size_t e = 0; e < events.size(); ++e) {
      n[slot(events[e].mark)] += 1;
      ASSERT_EQ(run.lr[e].total(), population_size(n));
      ASSERT_GE(run.lr[e].left, 0);
      ASSERT_GE(run.lr[e].right, 0);
    }
    EXPECT_EQ(run.partition.total(), run.path.events.population());
    const auto [left, right] = left_right_counts(run.partition, opt.f);
    if (!run.lr.empty()) {
      EXPECT_EQ(run.lr.back().left, left);
      EXPECT_EQ(run.lr.back().right, right);
    }
    ASSERT_EQ(run.snapshots.size(), 3u);
    EXPECT_TRUE(run.snapshots[0].sites.empty());
    for (const auto& s : run.snapshots) {
      std::int64_t total = 0;
      for (const auto& site : s.sites) {
        EXPECT_GE(site.count, 1);
        total += site.count;
      }
      EXPECT_EQ(total, run.path.events.counts_at(s.t)[0] + run.path.events.counts_at(s.t)[1] -
                           run.path.events.counts_at(s.t)[2]);
    }
  }
}

TEST(SimulatePopulation, AttachingPopulationKeepsMarks) {
  const auto cfg = config(30.0, 5);
  const auto plain = simulate(hawkes_bank(), cfg);
  const auto run = simulate_population(hawkes_bank(), cfg);
  EXPECT_EQ(plain.events, run.path.events);
}

TEST(SimulatePopulation, DeterministicAndNeedsEmptyStart) {
  const auto a = simulate_population(hawkes_bank(), config(20.0, 3));
  const auto b = simulate_population(hawkes_bank(), config(20.0, 3));
  EXPECT_EQ(a.partition.sites(), b.partition.sites());
  auto cfg = config(20.0, 3);
  cfg.initial_state = IntensityState{{}, {1, 0, 0}, 0.0};
  EXPECT_THROW(simulate_population(hawkes_bank(), cfg), UnsupportedError);
}

TEST(EpsilonStep, Cases) {
  std::int64_t l = 0, r = 0;
  epsilon_step(l, r, Mark::Clone, 0.3, 0.5, 0.0);  // empty: fresh uniform 0.3 <= f
  EXPECT_EQ(l, 1);
  l = 0, r = 2;
  epsilon_step(l, r, Mark::Clone, 0.0, 0.5, 1.0);  // L = 0: always R
  EXPECT_EQ(r, 3);
  l = 2, r = 0;
  epsilon_step(l, r, Mark::Clone, 0.99, 0.5, 0.0);  // R = 0: always L
  EXPECT_EQ(l, 3);
  l = 2, r = 2;
  epsilon_step(l, r, Mark::Clone, 0.99, 0.5, 1.0);
  EXPECT_EQ(l, 3);
  epsilon_step(l, r, Mark::Clone, 0.0, 0.5, 0.0);
  EXPECT_EQ(r, 3);
  epsilon_step(l, r, Mark::Death, 0.5, 0.5, 0.0);
  EXPECT_EQ(l, 2);
  l = 0, r = 1;
  epsilon_step(l, r, Mark::Death, 0.5, 0.5, 0.0);
  EXPECT_EQ(r, 0);
  EXPECT_THROW(epsilon_step(l, r, Mark::Death, 0.5, 0.5, 0.0), PreconditionViolation);
}

TEST(EpsilonChain, CouplingIsMonotone) {
  const double eps[] = {0.0, 0.5, 1.0};
  const auto bank = hawkes_bank();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto runs = simulate_epsilon_chains(bank, 0.5, eps, config(30.0, seed));
    ASSERT_EQ(runs.size(), 3u);
    for (std::size_t e = 0; e < runs[0].lr.size(); ++e) {
      ASSERT_LE(runs[0].lr[e].left, runs[1].lr[e].left);
      ASSERT_LE(runs[1].lr[e].left, runs[2].lr[e].left);
      // N is the same in every chain
      ASSERT_EQ(runs[0].lr[e].total(), runs[2].lr[e].total());
    }
  }
}

TEST(EpsilonChain, TotalMatchesEngine) {
  const auto cfg = config(40.0, 7);
  const auto chain = simulate_epsilon_chain(hawkes_bank(), 0.5, 0.3, cfg);
  const auto path = simulate(hawkes_bank(), cfg);
  EXPECT_EQ(chain.left + chain.right, path.events.population());
}

TEST(EpsilonChain, RejectsBadArguments) {
  EXPECT_THROW(simulate_epsilon_chain(hawkes_bank(), 0.5, 1.5, config(1.0, 1)), DomainError);
  EXPECT_THROW(simulate_epsilon_chain(hawkes_bank(), -0.5, 0.5, config(1.0, 1)), DomainError);
}

TEST(RhoLimit, Examples) {
  const auto bank = poisson({2.0, 1.0, 1.0});
  for (auto m : {ExpectationMethod::PaperClosedForm, ExpectationMethod::NumericRenewal}) {
    EXPECT_NEAR(rho_limit(bank, 0.75, 0.0, m), 0.25, 1e-9);
    EXPECT_NEAR(rho_limit(bank, 1.0, 1.0, m), 1.0, 1e-9);
    EXPECT_NEAR(rho_limit(bank, 0.5, 0.0, m), 0.0, 1e-9);
  }
  EXPECT_THROW(rho_limit(poisson({1.0, 1.0, 3.0}), 0.5, 0.0, ExpectationMethod::PaperClosedForm), DomainError);
}
