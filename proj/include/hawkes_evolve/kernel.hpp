#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <variant>

#include "hawkes_evolve/errors.hpp"
#include "hawkes_evolve/quadrature.hpp"

namespace hawkes_evolve {

// phi(t) = delta + alpha * exp(-beta * t)
struct ExpKernel {
  double alpha = 0.0;
  double beta = 1.0;
  double delta = 0.0;

  ExpKernel() = default;
  ExpKernel(double a, double b, double d = 0.0) : alpha(a), beta(b), delta(d) {
    if (!(a >= 0.0) || !(b > 0.0) || !(d >= 0.0)) {
      throw DomainError("ExpKernel requires alpha >= 0, beta > 0, delta >= 0");
    }
  }

  double operator()(double t) const { return delta + alpha * std::exp(-beta * t); }

  // Integral over [0, t].
  double integral(double t) const {
    return delta * t + alpha * (-std::expm1(-beta * t)) / beta;
  }

  friend bool operator==(const ExpKernel&, const ExpKernel&) = default;
};

// Arbitrary non-negative excitation function. `non_increasing` is a declared
// property; the thinning engine trusts it for its dominating bound.
struct GeneralKernel {
  std::function<double(double)> fn;
  bool non_increasing = false;
  double l1 = std::numeric_limits<double>::quiet_NaN();
  std::string label;

  double operator()(double t) const { return fn(t); }

  // L1 norm taken from quadrature when not supplied.
  static GeneralKernel make(std::function<double(double)> f, bool non_increasing,
                            std::string label = {}) {
    GeneralKernel k{std::move(f), non_increasing, 0.0, std::move(label)};
    k.l1 = quad::integrate_half_line(k.fn);
    return k;
  }
};

using Kernel = std::variant<ExpKernel, GeneralKernel>;

inline double kernel_eval(const Kernel& kernel, double t) {
  if (!(t >= 0.0)) throw DomainError("kernel_eval: elapsed time must be >= 0");
  return std::visit([t](const auto& k) { return k(t); }, kernel);
}

inline double l1_norm(const ExpKernel& k) {
  if (k.delta > 0.0) return std::numeric_limits<double>::infinity();
  return k.alpha / k.beta;
}

inline double l1_norm(const GeneralKernel& k) {
  if (std::isnan(k.l1)) return quad::integrate_half_line(k.fn);
  return k.l1;
}

inline double l1_norm(const Kernel& kernel) {
  return std::visit([](const auto& k) { return l1_norm(k); }, kernel);
}

inline bool is_non_increasing(const Kernel& kernel) {
  if (const auto* e = std::get_if<ExpKernel>(&kernel)) return e->alpha >= 0.0;
  return std::get<GeneralKernel>(kernel).non_increasing;
}

// Integral of the kernel over [0, t].
inline double kernel_integral(const Kernel& kernel, double t) {
  if (const auto* e = std::get_if<ExpKernel>(&kernel)) return e->integral(t);
  const auto& g = std::get<GeneralKernel>(kernel);
  return quad::integrate(g.fn, 0.0, t, 1e-12);
}

}  // namespace hawkes_evolve
