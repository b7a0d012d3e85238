#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hawkes_evolve/errors.hpp"

namespace hawkes_evolve::stats {

// Compensated running sum.
class KahanSum {
 public:
  void add(double x) noexcept {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const noexcept { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double se = 0.0;        // standard error of the mean
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  KahanSum acc;
  for (double x : xs) acc.add(x);
  s.mean = acc.value() / static_cast<double>(s.n);
  if (s.n < 2) return s;
  KahanSum sq;
  for (double x : xs) sq.add((x - s.mean) * (x - s.mean));
  s.variance = sq.value() / static_cast<double>(s.n - 1);
  s.se = std::sqrt(s.variance / static_cast<double>(s.n));
  return s;
}

// Standard error of the sample variance, from the fourth central moment:
// Var(s^2) ~ (m4 - (n-3)/(n-1) s^4) / n.
inline double variance_se(std::span<const double> xs) {
  const auto s = summarize(xs);
  if (s.n < 4) throw DomainError("variance_se: needs at least 4 samples");
  KahanSum m4;
  for (double x : xs) m4.add(std::pow(x - s.mean, 4));
  const double n = static_cast<double>(s.n);
  const double v = (m4.value() / n - (n - 3.0) / (n - 1.0) * s.variance * s.variance) / n;
  return std::sqrt(std::max(v, 0.0));
}

// Linear-interpolated quantile, q in [0, 1].
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw DomainError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q must lie in [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

// Kolmogorov survival function Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_q(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;  // series converges slowly; Q is 1 to double precision here
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// Asymptotic p-value with Stephens' finite-sample correction.
inline double ks_p_value(double d, double effective_n) {
  const double r = std::sqrt(effective_n);
  return kolmogorov_q((r + 0.12 + 0.11 / r) * d);
}

// One-sample test against the unit exponential.
inline KsResult ks_unit_exponential(std::vector<double> xs) {
  if (xs.empty()) throw DomainError("ks_unit_exponential: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double cdf = xs[k] > 0.0 ? -std::expm1(-xs[k]) : 0.0;
    d = std::max({d, static_cast<double>(k + 1) / n - cdf, cdf - static_cast<double>(k) / n});
  }
  return {d, ks_p_value(d, n), xs.size()};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_p_value(d, na * nb / (na + nb)), a.size() + b.size()};
}

}  // namespace hawkes_evolve::stats
