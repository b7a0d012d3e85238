#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hawkes_evolve/bank.hpp"
#include "hawkes_evolve/errors.hpp"
#include "hawkes_evolve/quadrature.hpp"
#include "hawkes_evolve/volterra.hpp"

namespace hawkes_evolve {

// Two routes to the first moments. PaperClosedForm evaluates the published
// formulas as written; NumericRenewal solves y = lambda0 + (Phi^T * y).
// They disagree as soon as any excitation is non-zero.
enum class ExpectationMethod { PaperClosedForm, NumericRenewal };

inline const char* method_name(ExpectationMethod m) {
  return m == ExpectationMethod::PaperClosedForm ? "paper" : "renewal";
}

// E[lambda^i(t)] = C + A e^{-beta_i t} + B e^{-beta_j t}; A + B + C = lambda0^i.
struct ABCCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

namespace detail {

inline void check_index(int index, int hi) {
  if (index < 1 || index > hi) throw DomainError("expectations: index out of range");
}

inline void check_time(double t) {
  if (!(t >= 0.0)) throw DomainError("expectations: t must be >= 0");
}

// Exponential, offset-free parameters with distinct beta, or nullopt when the
// closed forms of the exponential case do not apply.
inline std::optional<ExponentialKernels> closed_form_params(const KernelBank& bank) {
  auto e = bank.exponential();
  if (!e || bank.any_offset()) return std::nullopt;
  return e;
}

inline double kernel_at(const KernelBank& bank, std::size_t j, std::size_t i, double t) {
  return kernel_eval(bank.birth_kernel(j, i), t);
}

// Birth intensity expectation by direct numerical evaluation of the general
// double-integral formula (used for non-exponential kernels).
inline double general_birth_expectation(const KernelBank& bank, std::size_t i, double t) {
  const std::size_t j = 1 - i;
  const double li = bank.base_rate(i);
  const double lj = bank.base_rate(j);
  auto inner = [&](double s) {
    return quad::integrate(
        [&](double u) {
          return kernel_at(bank, i, j, s - u) * kernel_at(bank, j, i, u) -
                 kernel_at(bank, i, i, s - u) * kernel_at(bank, j, j, u);
        },
        0.0, s, 1e-11, 30);
  };
  const double cross = quad::integrate(inner, 0.0, t, 1e-10, 30);
  return li + li * cross + li * kernel_integral(bank.birth_kernel(i, i), t) +
         lj * kernel_integral(bank.birth_kernel(j, i), t);
}

}  // namespace detail

inline ABCCoefficients abc_coefficients(const KernelBank& bank, int index) {
  detail::check_index(index, 2);
  const auto p = detail::closed_form_params(bank);
  if (!p) throw UnsupportedError("abc_coefficients: requires exponential kernels with delta = 0");
  const std::size_t i = static_cast<std::size_t>(index - 1);
  const std::size_t j = 1 - i;
  const double bi = p->beta[i];
  const double bj = p->beta[j];
  if (bi == bj) throw DegenerateParameters("abc_coefficients: beta_1 == beta_2; use the renewal curve");
  const double li = bank.base_rate(i);
  const double lj = bank.base_rate(j);
  // alpha[src][dst]: a_ij = effect of i on j.
  const double aii = p->alpha[i][i], ajj = p->alpha[j][j];
  const double aij = p->alpha[i][j], aji = p->alpha[j][i];
  ABCCoefficients r;
  r.a = (li / bi) * (aij * aji - aii * ajj) / (bi - bj) - (li / bi) * aii - (lj / bi) * aji;
  r.b = (li / bj) * (aii * ajj - aij * aji) / (bi - bj);
  r.c = li - r.a - r.b;
  return r;
}

inline double expected_intensity_paper(const KernelBank& bank, int index, double t) {
  detail::check_index(index, 3);
  detail::check_time(t);
  const auto p = detail::closed_form_params(bank);
  if (index == 3) {
    const double l3 = bank.base_rate(2);
    if (p) return l3 + l3 * (-std::expm1(-p->death.beta * t)) * p->death.alpha / p->death.beta;
    return l3 + l3 * kernel_integral(bank.death_kernel(), t);
  }
  const std::size_t i = static_cast<std::size_t>(index - 1);
  if (p) {
    const auto abc = abc_coefficients(bank, index);
    return abc.c + abc.a * std::exp(-p->beta[i] * t) + abc.b * std::exp(-p->beta[1 - i] * t);
  }
  return detail::general_birth_expectation(bank, i, t);
}

// Time integral of expected_intensity_paper.
inline double expected_count_paper(const KernelBank& bank, int index, double t) {
  detail::check_index(index, 3);
  detail::check_time(t);
  const auto p = detail::closed_form_params(bank);
  if (index == 3) {
    const double l3 = bank.base_rate(2);
    if (p) {
      const double a3 = p->death.alpha, b3 = p->death.beta;
      return l3 * (1.0 + a3 / b3) * t + l3 * std::expm1(-b3 * t) * a3 / (b3 * b3);
    }
    return quad::integrate([&](double v) { return expected_intensity_paper(bank, 3, v); }, 0.0, t, 1e-10);
  }
  const std::size_t i = static_cast<std::size_t>(index - 1);
  if (p) {
    const auto abc = abc_coefficients(bank, index);
    const double bi = p->beta[i], bj = p->beta[1 - i];
    return abc.c * t + abc.a * (-std::expm1(-bi * t)) / bi + abc.b * (-std::expm1(-bj * t)) / bj;
  }
  return quad::integrate([&](double v) { return detail::general_birth_expectation(bank, i, v); }, 0.0, t,
                         1e-8, 20);
}

// Univariate exponential Hawkes (lambda0, alpha, beta), from the ODE
// d/dt E[lambda] = beta lambda0 + (alpha - beta) E[lambda]:
// E[lambda(t)] = beta lambda0 (e^{(alpha-beta)t} - 1)/(alpha - beta) + lambda0 e^{(alpha-beta)t}.
inline double univariate_intensity(double lambda0, double alpha, double beta, double t) {
  detail::check_time(t);
  if (!(lambda0 > 0.0) || !(alpha >= 0.0) || !(beta > 0.0))
    throw DomainError("univariate_intensity: needs lambda0 > 0, alpha >= 0, beta > 0");
  const double k = alpha - beta;
  if (k == 0.0) return lambda0 + beta * lambda0 * t;
  return beta * lambda0 * std::expm1(k * t) / k + lambda0 * std::exp(k * t);
}

// ---------------------------------------------------------------------------
// Renewal oracle

struct RenewalCurves {
  std::vector<double> times;
  std::vector<Rates> intensity;  // E[lambda^i(t)], third component ungated
  std::vector<Rates> count;      // E[N^i(t)]
};

inline RenewalCurves solve_renewal(const KernelBank& bank, std::span<const double> times,
                                   double rel_tol = 1e-6) {
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 2; ++i)
      if (!std::isfinite(l1_norm(bank.birth_kernel(j, i))))
        throw UnsupportedError("renewal: kernels must be L1-integrable");
  if (!std::isfinite(l1_norm(bank.death_kernel())))
    throw UnsupportedError("renewal: kernels must be L1-integrable");

  const Kernel phi[2][2] = {{bank.birth_kernel(0, 0), bank.birth_kernel(0, 1)},
                            {bank.birth_kernel(1, 0), bank.birth_kernel(1, 1)}};
  volterra::System<2> births;
  births.forcing = {bank.base_rate(0), bank.base_rate(1)};
  births.kernel = [&phi](double s) {
    std::array<std::array<double, 2>, 2> m{};
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) m[i][j] = kernel_eval(phi[j][i], s);
    return m;
  };
  const Kernel psi = bank.death_kernel();
  volterra::System<1> deaths;
  deaths.forcing = {bank.base_rate(2)};
  deaths.kernel = [&psi](double s) { return std::array<std::array<double, 1>, 1>{{{kernel_eval(psi, s)}}}; };

  const auto b = volterra::solve_at(births, times, rel_tol);
  const auto d = volterra::solve_at(deaths, times, rel_tol);
  RenewalCurves out;
  out.times.assign(times.begin(), times.end());
  out.intensity.resize(times.size());
  out.count.resize(times.size());
  for (std::size_t q = 0; q < times.size(); ++q) {
    out.intensity[q] = {b.value[q][0], b.value[q][1], d.value[q][0]};
    out.count[q] = {b.integral[q][0], b.integral[q][1], d.integral[q][0]};
  }
  return out;
}

inline std::vector<double> expected_intensity_renewal(const KernelBank& bank, int index,
                                                      std::span<const double> times) {
  detail::check_index(index, 3);
  const auto sol = solve_renewal(bank, times);
  std::vector<double> out(times.size());
  for (std::size_t q = 0; q < times.size(); ++q) out[q] = sol.intensity[q][static_cast<std::size_t>(index - 1)];
  return out;
}

inline double expected_count(const KernelBank& bank, int index, double t, ExpectationMethod method) {
  detail::check_index(index, 3);
  detail::check_time(t);
  if (method == ExpectationMethod::PaperClosedForm) return expected_count_paper(bank, index, t);
  if (t == 0.0) return 0.0;
  const double times[] = {t};
  return solve_renewal(bank, times).count[0][static_cast<std::size_t>(index - 1)];
}

// Curve of one index under one method, evaluated on a time grid.
struct ExpectationCurve {
  int index = 1;
  ExpectationMethod method = ExpectationMethod::PaperClosedForm;
  std::vector<double> times;
  std::vector<double> intensity;
  std::vector<double> count;
};

inline ExpectationCurve expectation_curve(const KernelBank& bank, int index, ExpectationMethod method,
                                          std::span<const double> times) {
  detail::check_index(index, 3);
  ExpectationCurve c;
  c.index = index;
  c.method = method;
  c.times.assign(times.begin(), times.end());
  if (method == ExpectationMethod::PaperClosedForm) {
    for (double t : times) {
      c.intensity.push_back(expected_intensity_paper(bank, index, t));
      c.count.push_back(expected_count_paper(bank, index, t));
    }
  } else {
    const auto sol = solve_renewal(bank, times);
    const auto s = static_cast<std::size_t>(index - 1);
    for (std::size_t q = 0; q < times.size(); ++q) {
      c.intensity.push_back(sol.intensity[q][s]);
      c.count.push_back(sol.count[q][s]);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Asymptotics

namespace detail {

// norms[j][i] = ||phi_ji||.
inline std::array<std::array<double, 2>, 2> birth_norms(const KernelBank& bank) {
  std::array<std::array<double, 2>, 2> n{};
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 2; ++i) n[j][i] = l1_norm(bank.birth_kernel(j, i));
  return n;
}

}  // namespace detail

// Largest eigenvalue modulus of the 2x2 branching matrix.
inline double branching_spectral_radius(const KernelBank& bank) {
  const auto n = detail::birth_norms(bank);
  const double tr = n[0][0] + n[1][1];
  const double det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) return std::max(std::abs(0.5 * (tr + std::sqrt(disc))), std::abs(0.5 * (tr - std::sqrt(disc))));
  return std::sqrt(det);
}

// (Lambda1, Lambda2, Lambda3) = lim E[lambda^i(t)].
// Closed form: the t -> inf limit of the closed-form curves, i.e. C(i,j) and
// lambda0^3 (1 + alpha3/beta3). Renewal: Lambda = lambda0 + M^T Lambda.
inline Rates asymptotic_rates(const KernelBank& bank, ExpectationMethod method) {
  const auto n = detail::birth_norms(bank);
  const double npsi = l1_norm(bank.death_kernel());
  for (const auto& row : n)
    for (double v : row)
      if (!std::isfinite(v)) throw NoStationaryRate("asymptotic_rates: kernel with infinite L1 norm");
  if (!std::isfinite(npsi)) throw NoStationaryRate("asymptotic_rates: kernel with infinite L1 norm");
  const auto& l = bank.base_rates();
  if (method == ExpectationMethod::PaperClosedForm) {
    Rates out{};
    for (std::size_t i = 0; i < 2; ++i) {
      const std::size_t j = 1 - i;
      out[i] = l[i] * (1.0 + n[i][i] + n[i][j] * n[j][i] - n[i][i] * n[j][j]) + l[j] * n[j][i];
    }
    out[2] = l[2] * (1.0 + npsi);
    return out;
  }
  if (branching_spectral_radius(bank) >= 1.0)
    throw NoStationaryRate("asymptotic_rates: branching matrix is not subcritical");
  if (npsi >= 1.0) throw NoStationaryRate("asymptotic_rates: death kernel norm >= 1");
  // (I - M) Lambda = lambda0 with M[i][j] = n[j][i].
  const double a = 1.0 - n[0][0], b = -n[1][0];
  const double c = -n[0][1], d = 1.0 - n[1][1];
  const double det = a * d - b * c;
  return {(l[0] * d - b * l[1]) / det, (a * l[1] - c * l[0]) / det, l[2] / (1.0 - npsi)};
}

struct CriticalFitness {
  double value = 0.0;
  bool bounds_applicable = false;  // alpha <= beta everywhere (closed-form method only)
  bool bounds_hold = true;
  double lower_bound = 0.0;  // lambda0^3 / (2 lambda0^1 + lambda0^2)
  double upper_bound = 0.0;  // 2 lambda0^3 / lambda0^1
};

inline CriticalFitness critical_fitness(const KernelBank& bank, ExpectationMethod method) {
  CriticalFitness r;
  const auto& l = bank.base_rates();
  r.lower_bound = l[2] / (2.0 * l[0] + l[1]);
  r.upper_bound = 2.0 * l[2] / l[0];
  if (method == ExpectationMethod::PaperClosedForm) {
    if (const auto p = detail::closed_form_params(bank)) {
      const double b1 = p->beta[0], b2 = p->beta[1], b3 = p->death.beta, a3 = p->death.alpha;
      const auto& a = p->alpha;
      const double den =
          (l[0] * b1 * b2 - l[0] * (a[0][0] * a[1][1] - a[0][1] * a[1][0]) + b2 * (l[0] * a[0][0] + l[1] * a[1][0])) *
          b3;
      if (den == 0.0) throw DegenerateParameters("critical_fitness: zero denominator");
      r.value = l[2] * (a3 + b3) * b1 * b2 / den;
      r.bounds_applicable = is_markov_admissible(bank).jumps_below_decay.value_or(false);
    } else {
      const auto lam = asymptotic_rates(bank, method);
      if (lam[0] == 0.0) throw DegenerateParameters("critical_fitness: Lambda1 = 0");
      r.value = lam[2] / lam[0];
    }
  } else {
    const auto lam = asymptotic_rates(bank, method);
    if (!(lam[0] > 0.0)) throw DegenerateParameters("critical_fitness: Lambda1 <= 0");
    r.value = lam[2] / lam[0];
  }
  if (r.bounds_applicable) r.bounds_hold = r.lower_bound <= r.value && r.value <= r.upper_bound;
  return r;
}

enum class Stability { Stable, Unstable, Critical };

inline const char* stability_name(Stability s) {
  switch (s) {
    case Stability::Stable: return "Stable";
    case Stability::Unstable: return "Unstable";
    case Stability::Critical: return "Critical";
  }
  return "?";
}

inline Stability compare_rates(const Rates& lam) {
  const double births = lam[0] + lam[1];
  if (std::abs(births - lam[2]) < 1e-12 * lam[2]) return Stability::Critical;
  return lam[2] > births ? Stability::Stable : Stability::Unstable;
}

struct StabilityReport {
  Stability paper = Stability::Critical;
  Stability renewal = Stability::Critical;
};

inline StabilityReport stability_check(const KernelBank& bank) {
  StabilityReport r;
  r.paper = compare_rates(asymptotic_rates(bank, ExpectationMethod::PaperClosedForm));
  try {
    r.renewal = compare_rates(asymptotic_rates(bank, ExpectationMethod::NumericRenewal));
  } catch (const NoStationaryRate&) {
    // Unbounded birth rates outgrow any death rate; an unbounded death rate
    // with finite births empties the population.
    r.renewal = branching_spectral_radius(bank) >= 1.0 ? Stability::Unstable : Stability::Stable;
  }
  return r;
}

enum class Regime { Subcritical, PhaseTransition, ConcentrationAtOne };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Subcritical: return "Subcritical";
    case Regime::PhaseTransition: return "PhaseTransition";
    case Regime::ConcentrationAtOne: return "ConcentrationAtOne";
  }
  return "?";
}

inline Regime regime_from(const Rates& lam, double fc) {
  if (lam[2] / (lam[0] + lam[1]) >= 1.0) return Regime::Subcritical;
  if (fc <= 1.0) return Regime::PhaseTransition;
  return Regime::ConcentrationAtOne;
}

struct RegimeReport {
  Rates lambda_paper{};
  std::optional<Rates> lambda_renewal;
  double fc_paper = 0.0;
  std::optional<double> fc_renewal;
  Regime regime = Regime::Subcritical;  // renewal basis when available
  Regime regime_paper = Regime::Subcritical;
  ExpectationMethod basis = ExpectationMethod::NumericRenewal;

  double fc() const { return basis == ExpectationMethod::NumericRenewal ? *fc_renewal : fc_paper; }
};

inline RegimeReport classify_regime(const KernelBank& bank) {
  RegimeReport r;
  r.lambda_paper = asymptotic_rates(bank, ExpectationMethod::PaperClosedForm);
  r.fc_paper = critical_fitness(bank, ExpectationMethod::PaperClosedForm).value;
  r.regime_paper = regime_from(r.lambda_paper, r.fc_paper);
  try {
    r.lambda_renewal = asymptotic_rates(bank, ExpectationMethod::NumericRenewal);
    r.fc_renewal = (*r.lambda_renewal)[2] / (*r.lambda_renewal)[0];
    r.regime = regime_from(*r.lambda_renewal, *r.fc_renewal);
    r.basis = ExpectationMethod::NumericRenewal;
  } catch (const NoStationaryRate&) {
    r.regime = r.regime_paper;
    r.basis = ExpectationMethod::PaperClosedForm;
  }
  return r;
}

}  // namespace hawkes_evolve
