#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hawkes_evolve/bank.hpp"
#include "hawkes_evolve/errors.hpp"
#include "hawkes_evolve/expectations.hpp"
#include "hawkes_evolve/parallel.hpp"
#include "hawkes_evolve/population.hpp"
#include "hawkes_evolve/simulate.hpp"
#include "hawkes_evolve/stats.hpp"

namespace hawkes_evolve {

// Tolerance of the MC comparisons: |mean - target| <= 3 se, with an absolute
// floor for deterministic quantities (zero standard error).
inline bool within_3se(double mean, double se, double target) {
  return std::abs(mean - target) <= 3.0 * se + 1e-12 * std::max(1.0, std::abs(target));
}

inline double z_score(double mean, double se, double target) {
  const double diff = mean - target;
  if (se > 0.0) return diff / se;
  return std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(target)) ? 0.0 : std::copysign(INFINITY, diff);
}

// ---------------------------------------------------------------------------
// Mean intensity curves

struct MCReport {
  std::vector<double> times;
  std::size_t n_paths = 0;
  // Per index (lambda1, lambda2, ungated lambda3) and grid point.
  std::array<std::vector<double>, 3> mean;
  std::array<std::vector<double>, 3> se;
  // Targets; empty when the method is unavailable for this bank.
  std::array<std::vector<double>, 3> paper;
  std::array<std::vector<double>, 3> renewal;
  std::string paper_unavailable;  // reason, when `paper` is empty

  bool pass(int index, ExpectationMethod m) const {
    const auto s = static_cast<std::size_t>(index - 1);
    const auto& target = m == ExpectationMethod::PaperClosedForm ? paper[s] : renewal[s];
    if (target.empty()) return false;
    for (std::size_t q = 0; q < times.size(); ++q)
      if (!within_3se(mean[s][q], se[s][q], target[q])) return false;
    return true;
  }

  double max_abs_z(int index, ExpectationMethod m) const {
    const auto s = static_cast<std::size_t>(index - 1);
    const auto& target = m == ExpectationMethod::PaperClosedForm ? paper[s] : renewal[s];
    if (target.empty()) return INFINITY;
    double worst = 0.0;
    for (std::size_t q = 0; q < times.size(); ++q)
      worst = std::max(worst, std::abs(z_score(mean[s][q], se[s][q], target[q])));
    return worst;
  }

  // "paper", "renewal", "both" or "neither": which curves the MC means accept.
  std::string matched(int index) const {
    const bool p = pass(index, ExpectationMethod::PaperClosedForm);
    const bool r = pass(index, ExpectationMethod::NumericRenewal);
    return p && r ? "both" : p ? "paper" : r ? "renewal" : "neither";
  }
};

struct MCOptions {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  Engine engine = Engine::MarkovExact;
};

inline MCReport mc_mean_intensity(const KernelBank& bank, std::span<const double> t_grid, std::size_t n_paths,
                                  const MCOptions& opt = {}) {
  if (n_paths < 2) throw DomainError("mc_mean_intensity: needs at least 2 paths");
  if (t_grid.empty()) throw DomainError("mc_mean_intensity: empty time grid");
  const double horizon = *std::max_element(t_grid.begin(), t_grid.end());
  if (!(horizon > 0.0)) throw DomainError("mc_mean_intensity: grid needs a positive time");

  SimConfig base;
  base.horizon = horizon;
  base.seed = opt.seed;
  base.engine = opt.engine;
  base.intensity_grid.assign(t_grid.begin(), t_grid.end());
  const std::size_t g = t_grid.size();

  // samples[r][q * 3 + s]
  const auto samples = parallel_map<std::vector<double>>(n_paths, resolve_threads(opt.threads), [&](std::size_t r) {
    SimConfig cfg = base;
    cfg.stream = r;
    const SimPath path = simulate(bank, cfg);
    std::vector<double> out(3 * g);
    for (std::size_t q = 0; q < g; ++q) {
      const auto& sample = path.intensity[q];
      out[3 * q] = sample.lambda[0];
      out[3 * q + 1] = sample.lambda[1];
      out[3 * q + 2] = sample.lambda3_ungated;
    }
    return out;
  });

  MCReport rep;
  rep.times.assign(t_grid.begin(), t_grid.end());
  rep.n_paths = n_paths;
  std::vector<double> column(n_paths);
  for (std::size_t s = 0; s < 3; ++s) {
    rep.mean[s].resize(g);
    rep.se[s].resize(g);
    for (std::size_t q = 0; q < g; ++q) {
      for (std::size_t r = 0; r < n_paths; ++r) column[r] = samples[r][3 * q + s];
      const auto sum = stats::summarize(column);
      rep.mean[s][q] = sum.mean;
      rep.se[s][q] = sum.se;
    }
  }
  try {
    for (int i = 1; i <= 3; ++i)
      for (double t : t_grid) rep.paper[static_cast<std::size_t>(i - 1)].push_back(expected_intensity_paper(bank, i, t));
  } catch (const std::exception& e) {
    for (auto& v : rep.paper) v.clear();
    rep.paper_unavailable = e.what();
  }
  const auto sol = solve_renewal(bank, t_grid);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t q = 0; q < g; ++q) rep.renewal[s].push_back(sol.intensity[q][s]);
  return rep;
}

// ---------------------------------------------------------------------------
// Generator drift

// zeta = (n1, l1, n2, l2, n3, l3), stored as counts and intensities.
struct GeneratorPoint {
  Counts n{};
  Rates l{};
};

struct TestFunction {
  std::string name;
  std::function<double(const GeneratorPoint&)> value;
  std::function<Rates(const GeneratorPoint&)> grad_l;  // dF/dl_i
};

// GF(zeta) = sum_{i=1,2} [beta_i (sum_j delta_ji n_j - l_i + lambda0^i) dF/dl_i + l_i (F(zeta + D_i) - F(zeta))]
//          + beta_3 (delta_3 n_3 - l_3 + lambda0^3) dF/dl_3 + l_3 1{n1 + n2 - n3 > 0} (F(zeta + D_3) - F(zeta)).
inline double generator_apply(const KernelBank& bank, const TestFunction& fn, const GeneratorPoint& z) {
  const auto k = bank.exponential();
  if (!k) throw UnsupportedError("generator_apply: bank is not of exponential Markov form");
  const auto& l0 = bank.base_rates();
  const Rates grad = fn.grad_l(z);
  const double f0 = fn.value(z);
  double out = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    double offset = 0.0;
    for (std::size_t j = 0; j < 2; ++j) offset += k->delta[j][i] * static_cast<double>(z.n[j]);
    out += k->beta[i] * (offset - z.l[i] + l0[i]) * grad[i];
    GeneratorPoint up = z;
    ++up.n[i];
    up.l[0] += k->alpha[i][0];
    up.l[1] += k->alpha[i][1];
    out += z.l[i] * (fn.value(up) - f0);
  }
  out += k->death.beta * (k->death.delta * static_cast<double>(z.n[2]) - z.l[2] + l0[2]) * grad[2];
  if (population_size(z.n) > 0) {
    GeneratorPoint up = z;
    ++up.n[2];
    up.l[2] += k->death.alpha;
    out += z.l[2] * (fn.value(up) - f0);
  }
  return out;
}

struct DriftResult {
  std::string name;
  double analytic = 0.0;
  double mc_mean = 0.0;
  double se = 0.0;
  double z = 0.0;

  bool passed() const { return std::abs(z) < 3.0; }
};

struct DriftOptions {
  double h = 1e-3;
  std::size_t n_reps = 100'000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

// MC estimate of (E[F(zeta_h)] - F(zeta_0)) / h against GF(zeta_0).
inline std::vector<DriftResult> generator_drift_check(const KernelBank& bank, const GeneratorPoint& start,
                                                      std::span<const TestFunction> fns,
                                                      const DriftOptions& opt = {}) {
  if (!(opt.h > 0.0)) throw DomainError("generator_drift_check: h must be > 0");
  if (opt.n_reps < 2) throw DomainError("generator_drift_check: needs at least 2 replications");
  if (!is_markov_admissible(bank).exact_markov())
    throw UnsupportedError("generator_drift_check: needs exponential kernels with delta = 0");
  const auto& l0 = bank.base_rates();
  IntensityState s0;
  s0.counts = start.n;
  for (std::size_t i = 0; i < 3; ++i) s0.xi[i] = start.l[i] - l0[i];
  if (population_size(start.n) < 0) throw DomainError("generator_drift_check: negative population");

  SimConfig base;
  base.horizon = opt.h;
  base.seed = opt.seed;
  base.initial_state = s0;
  const auto ends = parallel_map<GeneratorPoint>(opt.n_reps, resolve_threads(opt.threads), [&](std::size_t r) {
    SimConfig cfg = base;
    cfg.stream = r;
    const auto path = simulate_markov(bank, cfg);
    GeneratorPoint z;
    z.n = path.final_state.counts;
    for (std::size_t i = 0; i < 3; ++i) z.l[i] = l0[i] + path.final_state.xi[i];
    return z;
  });

  std::vector<DriftResult> out;
  std::vector<double> diffs(opt.n_reps);
  for (const auto& fn : fns) {
    const double f0 = fn.value(start);
    for (std::size_t r = 0; r < opt.n_reps; ++r) diffs[r] = (fn.value(ends[r]) - f0) / opt.h;
    const auto sum = stats::summarize(diffs);
    DriftResult d;
    d.name = fn.name;
    d.analytic = generator_apply(bank, fn, start);
    d.mc_mean = sum.mean;
    d.se = sum.se;
    d.z = z_score(sum.mean, sum.se, d.analytic);
    out.push_back(d);
  }
  return out;
}

// The polynomial family used by the drift checks.
inline std::vector<TestFunction> polynomial_test_functions() {
  using P = GeneratorPoint;
  auto n = [](const P& z, std::size_t i) { return static_cast<double>(z.n[i]); };
  return {
      {"l1", [](const P& z) { return z.l[0]; }, [](const P&) { return Rates{1.0, 0.0, 0.0}; }},
      {"l1^2", [](const P& z) { return z.l[0] * z.l[0]; }, [](const P& z) { return Rates{2.0 * z.l[0], 0.0, 0.0}; }},
      {"n1*l2", [n](const P& z) { return n(z, 0) * z.l[1]; }, [n](const P& z) { return Rates{0.0, n(z, 0), 0.0}; }},
      {"n3", [n](const P& z) { return n(z, 2); }, [](const P&) { return Rates{}; }},
      {"l1*l2+n2*l3", [n](const P& z) { return z.l[0] * z.l[1] + n(z, 1) * z.l[2]; },
       [n](const P& z) { return Rates{z.l[1], z.l[0], n(z, 1)}; }},
  };
}

// ---------------------------------------------------------------------------
// Path batches

inline std::vector<SimPath> simulate_batch(const KernelBank& bank, const SimConfig& base, std::size_t n_paths,
                                           unsigned threads = 0) {
  return parallel_map<SimPath>(n_paths, resolve_threads(threads), [&](std::size_t r) {
    SimConfig cfg = base;
    cfg.stream = r;
    return simulate(bank, cfg);
  });
}

struct OccupationSummary {
  std::vector<double> fractions;  // per path
  double min = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double mean = 0.0;
  double se = 0.0;
};

inline OccupationSummary zero_occupation_fraction(std::span<const SimPath> paths) {
  if (paths.empty()) throw DomainError("zero_occupation_fraction: no paths");
  OccupationSummary s;
  const double horizon = paths.front().horizon;
  for (const auto& p : paths) {
    if (p.horizon != horizon) throw DomainError("zero_occupation_fraction: paths need a common horizon");
    s.fractions.push_back(p.zero_occupation_time / p.horizon);
  }
  s.min = *std::min_element(s.fractions.begin(), s.fractions.end());
  s.median = stats::quantile(s.fractions, 0.5);
  s.q05 = stats::quantile(s.fractions, 0.05);
  s.q95 = stats::quantile(s.fractions, 0.95);
  const auto sum = stats::summarize(s.fractions);
  s.mean = sum.mean;
  s.se = sum.se;
  return s;
}

// ---------------------------------------------------------------------------
// Phase transition sweep

struct SweepRun {
  std::vector<double> cdf;              // F_T(f) over the grid; empty if N(T) = 0 and no sites
  std::vector<std::int64_t> right;      // R^f(T) over the grid
  std::int64_t population = 0;          // N(T)
  std::int64_t right_at_fc = 0;         // R^{f_c}(T)
  double zero_occupation_fraction = 0.0;
};

struct SweepResult {
  std::vector<double> f_grid;
  double horizon = 0.0;
  std::vector<SweepRun> runs;
  std::vector<double> mean_cdf;  // averaged over runs with an occupied partition
  std::size_t runs_with_sites = 0;
  RegimeReport regime;
  std::optional<double> sup_distance_paper;    // nullopt when f_c >= 1
  std::optional<double> sup_distance_renewal;
  std::optional<double> fc_hat;                // knee estimate
  double fc_used = 0.0;                        // threshold for the R^{f_c} statistics
  std::vector<double> mean_gap;                // mean over runs of (R^{f_c} - R^f)/N
  double mean_right_fc_fraction = 0.0;         // mean of R^{f_c}/N
  bool cdf_monotone = true;
};

// First grid point where the averaged F exceeds 0.025, then a least-squares
// line through the remaining points, extrapolated to F = 0.
inline std::optional<double> knee_estimate(std::span<const double> f, std::span<const double> cdf,
                                           double threshold = 0.025) {
  if (f.size() != cdf.size()) throw DomainError("knee_estimate: size mismatch");
  std::size_t first = f.size();
  for (std::size_t k = 0; k < f.size(); ++k)
    if (cdf[k] > threshold) {
      first = k;
      break;
    }
  if (f.size() - first < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(f.size() - first);
  for (std::size_t k = first; k < f.size(); ++k) {
    sx += f[k];
    sy += cdf[k];
    sxx += f[k] * f[k];
    sxy += f[k] * cdf[k];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  if (!(slope > 0.0)) return std::nullopt;
  const double intercept = (sy - slope * sx) / m;
  return -intercept / slope;
}

struct SweepOptions {
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

inline SweepResult phase_transition_sweep(const KernelBank& bank, std::span<const double> f_grid, double horizon,
                                          std::size_t n_runs, const SweepOptions& opt = {}) {
  if (f_grid.empty()) throw DomainError("phase_transition_sweep: empty f grid");
  if (n_runs == 0) throw DomainError("phase_transition_sweep: needs at least one run");
  for (std::size_t k = 0; k < f_grid.size(); ++k) {
    check_threshold(f_grid[k], "phase_transition_sweep");
    if (k > 0 && f_grid[k] <= f_grid[k - 1]) throw DomainError("phase_transition_sweep: f grid must increase");
  }
  SweepResult res;
  res.f_grid.assign(f_grid.begin(), f_grid.end());
  res.horizon = horizon;
  res.regime = classify_regime(bank);
  res.fc_used = std::clamp(res.regime.fc(), 0.0, 1.0);

  SimConfig base;
  base.horizon = horizon;
  base.seed = opt.seed;
  res.runs = parallel_map<SweepRun>(n_runs, resolve_threads(opt.threads), [&](std::size_t r) {
    SimConfig cfg = base;
    cfg.stream = r;
    PopulationOptions po;
    po.f = res.fc_used;
    po.record_lr = false;
    const auto pop = simulate_population(bank, cfg, po);
    SweepRun run;
    run.population = pop.partition.total();
    run.zero_occupation_fraction = pop.path.zero_occupation_time / horizon;
    run.right_at_fc = left_right_counts(pop.partition, res.fc_used).second;
    for (double f : f_grid) {
      run.right.push_back(left_right_counts(pop.partition, f).second);
      if (const auto F = empirical_site_cdf(pop.partition, f)) run.cdf.push_back(*F);
    }
    if (run.cdf.size() != f_grid.size()) run.cdf.clear();
    return run;
  });

  res.mean_cdf.assign(f_grid.size(), 0.0);
  res.mean_gap.assign(f_grid.size(), 0.0);
  std::size_t occupied = 0;
  std::vector<stats::KahanSum> cdf_sum(f_grid.size()), gap_sum(f_grid.size());
  stats::KahanSum fc_sum;
  for (const auto& run : res.runs) {
    if (!run.cdf.empty()) {
      ++res.runs_with_sites;
      for (std::size_t k = 0; k < f_grid.size(); ++k) {
        cdf_sum[k].add(run.cdf[k]);
        if (k > 0 && run.cdf[k] < run.cdf[k - 1]) res.cdf_monotone = false;
      }
    }
    if (run.population > 0) {
      ++occupied;
      const double n = static_cast<double>(run.population);
      fc_sum.add(static_cast<double>(run.right_at_fc) / n);
      for (std::size_t k = 0; k < f_grid.size(); ++k)
        gap_sum[k].add(static_cast<double>(run.right_at_fc - run.right[k]) / n);
    }
  }
  if (res.runs_with_sites > 0)
    for (std::size_t k = 0; k < f_grid.size(); ++k)
      res.mean_cdf[k] = cdf_sum[k].value() / static_cast<double>(res.runs_with_sites);
  if (occupied > 0) {
    res.mean_right_fc_fraction = fc_sum.value() / static_cast<double>(occupied);
    for (std::size_t k = 0; k < f_grid.size(); ++k) res.mean_gap[k] = gap_sum[k].value() / static_cast<double>(occupied);
  }

  auto sup_distance = [&](double fc) -> std::optional<double> {
    if (!(fc < 1.0) || res.runs_with_sites == 0) return std::nullopt;
    double worst = 0.0;
    for (std::size_t k = 0; k < f_grid.size(); ++k)
      worst = std::max(worst, std::abs(res.mean_cdf[k] - theoretical_site_cdf(f_grid[k], std::max(fc, 0.0))));
    return worst;
  };
  res.sup_distance_paper = sup_distance(res.regime.fc_paper);
  if (res.regime.fc_renewal) res.sup_distance_renewal = sup_distance(*res.regime.fc_renewal);
  if (res.runs_with_sites > 0) res.fc_hat = knee_estimate(f_grid, res.mean_cdf);
  return res;
}

// ---------------------------------------------------------------------------
// rho limit

struct RhoReport {
  double f = 0.0;
  double epsilon = 0.0;
  double horizon = 0.0;
  std::vector<double> terminal_rho;            // L/N at T, runs with N(T) > 0
  std::vector<std::int64_t> zero_returns;      // per run
  double mean = 0.0;
  double se = 0.0;
  std::optional<double> limit_paper;
  std::optional<double> limit_renewal;
};

struct RhoOptions {
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

inline RhoReport rho_convergence_check(const KernelBank& bank, double f, double eps, double horizon,
                                       std::size_t n_runs, const RhoOptions& opt = {}) {
  if (n_runs == 0) throw DomainError("rho_convergence_check: needs at least one run");
  RhoReport rep;
  rep.f = f;
  rep.epsilon = eps;
  rep.horizon = horizon;
  SimConfig base;
  base.horizon = horizon;
  base.seed = opt.seed;
  const auto runs = parallel_map<EpsilonChainRun>(n_runs, resolve_threads(opt.threads), [&](std::size_t r) {
    SimConfig cfg = base;
    cfg.stream = r;
    return simulate_epsilon_chain(bank, f, eps, cfg, false);
  });
  for (const auto& run : runs) {
    rep.zero_returns.push_back(run.left_zero_returns);
    const auto n = run.left + run.right;
    if (n > 0) rep.terminal_rho.push_back(static_cast<double>(run.left) / static_cast<double>(n));
  }
  const auto sum = stats::summarize(rep.terminal_rho);
  rep.mean = sum.mean;
  rep.se = sum.se;
  try {
    rep.limit_paper = rho_limit(bank, f, eps, ExpectationMethod::PaperClosedForm);
  } catch (const std::domain_error&) {
  }
  try {
    rep.limit_renewal = rho_limit(bank, f, eps, ExpectationMethod::NumericRenewal);
  } catch (const std::domain_error&) {
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Goodness of fit

struct ProcessFit {
  int index = 1;
  std::size_t events = 0;
  std::optional<stats::KsResult> ks;  // nullopt: fewer than min_events residuals

  bool insufficient() const { return !ks.has_value(); }
};

struct GofReport {
  std::array<ProcessFit, 3> processes;
};

inline GofReport gof_report(const SimPath& path, const KernelBank& bank, std::size_t min_events = 100) {
  GofReport rep;
  for (int i = 1; i <= 3; ++i) {
    auto& p = rep.processes[static_cast<std::size_t>(i - 1)];
    p.index = i;
    auto residuals = time_rescale_residuals(path, bank, i);
    p.events = residuals.size();
    if (residuals.size() >= min_events) p.ks = stats::ks_unit_exponential(std::move(residuals));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Engine comparison on terminal counts

struct CountComparison {
  int index = 1;
  stats::Summary markov;
  stats::Summary thinning;
  double mean_z = 0.0;      // difference of means over the joint standard error
  double variance_z = 0.0;  // same for the sample variances
};

struct EngineComparison {
  std::array<CountComparison, 3> counts;
  stats::KsResult ks_n1;  // two-sample test on N1(T)
};

inline EngineComparison compare_engines(const KernelBank& bank, double horizon, std::size_t n_paths,
                                        std::uint64_t seed = 0, unsigned threads = 0) {
  if (n_paths < 4) throw DomainError("compare_engines: needs at least 4 paths");
  SimConfig base;
  base.horizon = horizon;
  base.seed = seed;
  auto terminal = [&](Engine engine, std::uint64_t stream_offset) {
    SimConfig cfg = base;
    cfg.engine = engine;
    return parallel_map<Counts>(n_paths, resolve_threads(threads), [&](std::size_t r) {
      SimConfig c = cfg;
      c.stream = stream_offset + r;
      return simulate(bank, c).final_state.counts;
    });
  };
  // Disjoint streams so the two samples are independent.
  const auto a = terminal(Engine::MarkovExact, 0);
  const auto b = terminal(Engine::ThinningHistory, n_paths);
  EngineComparison out;
  std::vector<double> xa(n_paths), xb(n_paths);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t r = 0; r < n_paths; ++r) {
      xa[r] = static_cast<double>(a[r][s]);
      xb[r] = static_cast<double>(b[r][s]);
    }
    auto& c = out.counts[s];
    c.index = static_cast<int>(s) + 1;
    c.markov = stats::summarize(xa);
    c.thinning = stats::summarize(xb);
    const double se_mean = std::hypot(c.markov.se, c.thinning.se);
    c.mean_z = z_score(c.markov.mean, se_mean, c.thinning.mean);
    const double se_var = std::hypot(stats::variance_se(xa), stats::variance_se(xb));
    c.variance_z = z_score(c.markov.variance, se_var, c.thinning.variance);
    if (s == 0) out.ks_n1 = stats::ks_two_sample(xa, xb);
  }
  return out;
}

}  // namespace hawkes_evolve
