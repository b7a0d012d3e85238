// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is nonzero iff a criterion fails that is not on the
// known-unattainable list below. Known failures still print FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "hawkes_evolve.hpp"

using namespace hawkes_evolve;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Criterion 11: the lower bound lambda0^3 / (2 lambda0^1 + lambda0^2) does not
// hold for every bank with alpha <= beta. Counterexample: lambda0 = (1, 1, 1),
// beta = (1, 2), alpha = [[1, 2], [1, 0]], alpha3 = 0 gives f_c = 1/4 < 1/3.
const std::set<int> kKnownUnattainable{11};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

KernelBank poisson(Rates rates) {
  ExponentialKernels k;
  k.beta = {1.0, 2.0};  // the closed-form curves need distinct decays
  return KernelBank(rates, k);
}

KernelBank mutual_bank() {
  ExponentialKernels k;
  k.beta = {1.5, 2.0};
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 2; ++i) k.alpha[j][i] = 0.4 * k.beta[i];
  k.death = ExpKernel(0.4, 1.0);
  return KernelBank({1.0, 0.8, 1.2}, k);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t q = 0; q < n; ++q) g[q] = lo + (hi - lo) * static_cast<double>(q) / static_cast<double>(n - 1);
  return g;
}

Verdict poisson_degeneration() {
  const auto bank = poisson({2.0, 1.0, 1.5});
  const auto grid = uniform_grid(0.5, 10.0, 20);
  const auto rep = mc_mean_intensity(bank, grid, 10'000, {.seed = 1});
  bool mc = true;
  for (int i = 1; i <= 3; ++i) mc = mc && rep.pass(i, ExpectationMethod::NumericRenewal);
  double gap = 0.0;
  const auto sol = solve_renewal(bank, grid);
  for (int i = 1; i <= 3; ++i)
    for (std::size_t q = 0; q < grid.size(); ++q) {
      const double paper = expected_intensity_paper(bank, i, grid[q]);
      gap = std::max(gap, std::abs(paper - sol.intensity[q][static_cast<std::size_t>(i - 1)]));
      gap = std::max(gap, std::abs(paper - bank.base_rate(static_cast<std::size_t>(i - 1))));
    }
  return {mc && gap <= 1e-12, "MC within 3se on all 60 points: " + std::string(mc ? "yes" : "no") +
                                  ", max |paper - renewal| = " + fmt("%.2e", gap)};
}

Verdict engine_equivalence() {
  const auto c = compare_engines(mutual_bank(), 50.0, 2000, 2);
  bool ok = c.ks_n1.p_value > 0.01;
  double worst = 0.0;
  for (const auto& x : c.counts) {
    worst = std::max({worst, std::abs(x.mean_z), std::abs(x.variance_z)});
    ok = ok && std::abs(x.mean_z) < 3.0 && std::abs(x.variance_z) < 3.0;
  }
  return {ok, "max |z| over means/variances = " + fmt("%.2f", worst) + ", KS p on N1(T) = " +
                  fmt("%.3f", c.ks_n1.p_value)};
}

Verdict univariate_remark() {
  ExponentialKernels k;
  k.beta = {2.0, 3.0};
  k.alpha[0][0] = 1.0;
  const KernelBank bank({1.0, 1.0, 1.0}, k);
  const auto grid = uniform_grid(0.0, 10.0, 201);
  const auto sol = solve_renewal(bank, grid);
  double sup = 0.0;
  for (std::size_t q = 0; q < grid.size(); ++q)
    sup = std::max(sup, std::abs(sol.intensity[q][0] - univariate_intensity(1.0, 1.0, 2.0, grid[q])));
  const std::vector<double> t10{10.0};
  const auto rep = mc_mean_intensity(bank, t10, 10'000, {.seed = 3});
  const double renewal = rep.renewal[0][0];
  const double z = z_score(rep.mean[0][0], rep.se[0][0], renewal);
  const double paper = expected_intensity_paper(bank, 1, 10.0);
  return {sup <= 1e-5 && std::abs(z) < 3.0,
          "sup |renewal - univariate formula| = " + fmt("%.2e", sup) + ", MC E[l1(10)] = " +
              fmt("%.4f", rep.mean[0][0]) + " +- " + fmt("%.4f", rep.se[0][0]) + " vs renewal " +
              fmt("%.5f", renewal) + " (z = " + fmt("%.2f", z) + "); closed form of the two-type mean gives " +
              fmt("%.4f", paper) + ", deviation " + fmt("%.4f", paper - renewal) + " (reported, not gated)"};
}

Verdict generator_drift() {
  const auto bank = mutual_bank();
  const auto fns = polynomial_test_functions();
  const std::vector<GeneratorPoint> states{
      {{0, 0, 0}, bank.base_rates()},
      {{3, 2, 1}, {2.0, 1.5, 1.6}},
      {{1, 0, 1}, {1.3, 2.2, 3.0}},
  };
  int passed = 0;
  double worst = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto res = generator_drift_check(bank, states[s], fns, {.h = 1e-3, .n_reps = 100'000, .seed = 40 + s});
    for (const auto& d : res) {
      passed += d.passed();
      worst = std::max(worst, std::abs(d.z));
    }
  }
  return {passed >= 14, std::to_string(passed) + "/15 with |z| < 3, max |z| = " + fmt("%.2f", worst)};
}

Verdict subcritical_occupancy() {
  SimConfig cfg;
  cfg.horizon = 2000.0;
  cfg.seed = 5;
  const auto paths = simulate_batch(poisson({1.0, 1.0, 3.0}), cfg, 50);
  const auto s = zero_occupation_fraction(paths);
  return {s.min > 0.0 && std::abs(s.median - 1.0 / 3.0) <= 0.05,
          "min fraction = " + fmt("%.4f", s.min) + ", median = " + fmt("%.4f", s.median) + " (oracle 1/3)"};
}

Verdict phase_transition() {
  const auto grid = io::parse_grid("0:1:0.02");
  const auto res = phase_transition_sweep(poisson({2.0, 1.0, 1.0}), grid, 5000.0, 50, {.seed = 6});
  int concentrated = 0;
  for (const auto& run : res.runs)
    if (run.population > 0 && static_cast<double>(run.right_at_fc) / static_cast<double>(run.population) >= 0.95)
      ++concentrated;
  const double sup = res.sup_distance_paper.value_or(INFINITY);
  return {sup <= 0.05 && concentrated >= 45 && std::abs(res.fc_used - 0.5) < 1e-9,
          "sup |F_T - (f-0.5)+/0.5| = " + fmt("%.4f", sup) + ", R^0.5/N >= 0.95 in " + std::to_string(concentrated) +
              "/50 runs, knee estimate " + (res.fc_hat ? fmt("%.3f", *res.fc_hat) : std::string("n/a"))};
}

Verdict concentration() {
  const std::vector<double> grid{0.9};
  const auto res = phase_transition_sweep(poisson({1.0, 2.0, 1.5}), grid, 5000.0, 50, {.seed = 7});
  int hits = 0;
  for (const auto& run : res.runs)
    if (run.population > 0 && static_cast<double>(run.right[0]) / static_cast<double>(run.population) >= 0.9) ++hits;
  return {hits >= 45, "R^0.9/N >= 0.9 in " + std::to_string(hits) + "/50 runs"};
}

Verdict rho_limit_check() {
  const auto bank = poisson({2.0, 1.0, 1.0});
  const auto above = rho_convergence_check(bank, 0.75, 0.0, 5000.0, 50, {.seed = 8});
  const auto below = rho_convergence_check(bank, 0.3, 0.0, 5000.0, 50, {.seed = 9});
  const auto fewest = *std::min_element(below.zero_returns.begin(), below.zero_returns.end());
  return {std::abs(above.mean - 0.25) <= 0.03 && fewest >= 10,
          "mean terminal L/N = " + fmt("%.4f", above.mean) + " +- " + fmt("%.4f", above.se) +
              " (limit 0.25); f = 0.3: fewest zero-returns per run = " + std::to_string(fewest)};
}

Verdict epsilon_coupling() {
  const auto bank = mutual_bank();
  const double eps[] = {0.0, 0.5, 1.0};
  std::size_t violations = 0, checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SimConfig cfg;
    cfg.horizon = 200.0;
    cfg.seed = 1000 + seed;
    const auto runs = simulate_epsilon_chains(bank, 0.5, eps, cfg);
    for (std::size_t e = 0; e < runs[0].lr.size(); ++e) {
      ++checked;
      if (runs[0].lr[e].left > runs[1].lr[e].left || runs[1].lr[e].left > runs[2].lr[e].left) ++violations;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(checked) +
                               " event times in 100 seeds"};
}

Verdict goodness_of_fit() {
  const auto bank = mutual_bank();
  const auto wrong = bank.with_scaled_decay(0.5);
  SimConfig base;
  base.horizon = 300.0;
  base.seed = 10;
  const auto paths = simulate_batch(bank, base, 100);
  int pass_good = 0, fail_bad = 0;
  for (const auto& p : paths) {
    auto all_pass = [](const GofReport& r) {
      for (const auto& x : r.processes)
        if (x.insufficient() || x.ks->p_value <= 0.01) return false;
      return true;
    };
    pass_good += all_pass(gof_report(p, bank));
    fail_bad += !all_pass(gof_report(p, wrong));
  }
  return {pass_good >= 95 && fail_bad >= 80, "correct bank passes in " + std::to_string(pass_good) +
                                                 "/100 seeds; halved-decay analysis fails in " +
                                                 std::to_string(fail_bad) + "/100"};
}

Verdict fc_bounds() {
  // Sampling plan fixed before looking at results.
  CounterRng rng(0, 11);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  int violations = 0;
  double worst_ratio = INFINITY;
  for (int b = 0; b < 1000; ++b) {
    Rates l0{u(0.1, 5), u(0.1, 5), u(0.1, 5)};
    ExponentialKernels k;
    k.beta = {u(0.5, 5), u(0.5, 5)};
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t i = 0; i < 2; ++i) k.alpha[j][i] = u(0, k.beta[i]);
    const double b3 = u(0.5, 5);
    k.death = ExpKernel(u(0, b3), b3);
    const auto fc = critical_fitness(KernelBank(l0, k), ExpectationMethod::PaperClosedForm);
    if (!fc.bounds_hold) ++violations;
    worst_ratio = std::min(worst_ratio, fc.value / fc.lower_bound);
  }
  return {violations == 0, std::to_string(violations) + "/1000 banks violate the bounds; smallest f_c / lower bound = " +
                               fmt("%.4f", worst_ratio)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "Poisson degeneration", poisson_degeneration},
      {2, "cross-engine equivalence", engine_equivalence},
      {3, "univariate consistency", univariate_remark},
      {4, "generator drift", generator_drift},
      {5, "subcritical occupancy", subcritical_occupancy},
      {6, "phase transition", phase_transition},
      {7, "concentration near 1", concentration},
      {8, "rho limit", rho_limit_check},
      {9, "epsilon coupling monotonicity", epsilon_coupling},
      {10, "goodness of fit", goodness_of_fit},
      {11, "f_c bounds", fc_bounds},
  };
  int hard_failures = 0;
  std::vector<int> known;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) {
      if (kKnownUnattainable.count(c.id)) known.push_back(c.id);
      else ++hard_failures;
    }
  }
  for (int id : known)
    std::printf("note: criterion %d fails as a known-unattainable check (lower bound false in general); "
                "excluded from the exit status\n",
                id);
  std::printf("%s: %d unexpected failure(s)\n", hard_failures ? "FAILED" : "OK", hard_failures);
  return hard_failures ? 1 : 0;
}
