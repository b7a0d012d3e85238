#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hawkes_evolve/errors.hpp"

namespace hawkes_evolve::volterra {

// Linear Volterra system of the second kind with convolution kernel,
//   y_i(t) = c_i + sum_j int_0^t K_ij(t - u) y_j(u) du,   i < Dim,
// discretized with the trapezoidal rule on a uniform grid.
template <std::size_t Dim>
struct System {
  std::array<double, Dim> forcing{};
  // kernel(s) returns the matrix K(s), row = target i, column = source j.
  std::function<std::array<std::array<double, Dim>, Dim>(double)> kernel;
};

template <std::size_t Dim>
struct GridSolution {
  double step = 0.0;
  std::vector<std::array<double, Dim>> value;     // y(n h)
  std::vector<std::array<double, Dim>> integral;  // int_0^{n h} y
};

namespace detail {

template <std::size_t Dim>
std::array<double, Dim> solve_linear(std::array<std::array<double, Dim>, Dim> a,
                                     std::array<double, Dim> b) {
  if constexpr (Dim == 1) {
    return {b[0] / a[0][0]};
  } else {
    static_assert(Dim == 2, "only 1x1 and 2x2 systems are needed");
    const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    return {(b[0] * a[1][1] - a[0][1] * b[1]) / det, (a[0][0] * b[1] - b[0] * a[1][0]) / det};
  }
}

// Four-point Lagrange interpolation of a uniformly sampled series.
inline double interpolate(std::span<const double> ys, double h, double t) {
  const std::size_t n = ys.size();
  const double pos = t / h;
  if (n < 4) {
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(pos), n - 2);
    const double w = pos - static_cast<double>(k);
    return ys[k] * (1.0 - w) + ys[k + 1] * w;
  }
  std::size_t base = static_cast<std::size_t>(std::floor(pos));
  base = base == 0 ? 0 : base - 1;
  base = std::min(base, n - 4);
  const double x = pos - static_cast<double>(base);
  double out = 0.0;
  for (std::size_t a = 0; a < 4; ++a) {
    double w = 1.0;
    for (std::size_t b = 0; b < 4; ++b) {
      if (a != b) w *= (x - static_cast<double>(b)) / (static_cast<double>(a) - static_cast<double>(b));
    }
    out += w * ys[base + a];
  }
  return out;
}

}  // namespace detail

template <std::size_t Dim>
GridSolution<Dim> solve_trapezoidal(const System<Dim>& sys, double t_max, std::size_t steps) {
  using Mat = std::array<std::array<double, Dim>, Dim>;
  const double h = t_max / static_cast<double>(steps);
  std::vector<Mat> k(steps + 1);
  for (std::size_t d = 0; d <= steps; ++d) k[d] = sys.kernel(static_cast<double>(d) * h);

  GridSolution<Dim> out;
  out.step = h;
  out.value.resize(steps + 1);
  out.integral.resize(steps + 1);
  out.value[0] = sys.forcing;
  out.integral[0].fill(0.0);

  Mat lhs{};
  for (std::size_t i = 0; i < Dim; ++i)
    for (std::size_t j = 0; j < Dim; ++j) lhs[i][j] = (i == j ? 1.0 : 0.0) - 0.5 * h * k[0][i][j];

  for (std::size_t n = 1; n <= steps; ++n) {
    std::array<double, Dim> rhs{};
    for (std::size_t i = 0; i < Dim; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < Dim; ++j) {
        acc += 0.5 * k[n][i][j] * out.value[0][j];
        for (std::size_t m = 1; m < n; ++m) acc += k[n - m][i][j] * out.value[m][j];
      }
      rhs[i] = sys.forcing[i] + h * acc;
    }
    out.value[n] = detail::solve_linear<Dim>(lhs, rhs);
    for (std::size_t i = 0; i < Dim; ++i)
      out.integral[n][i] = out.integral[n - 1][i] + 0.5 * h * (out.value[n - 1][i] + out.value[n][i]);
  }
  return out;
}

// Values and running integrals of each component at the query times.
template <std::size_t Dim>
struct QueryResult {
  std::vector<std::array<double, Dim>> value;
  std::vector<std::array<double, Dim>> integral;
  std::size_t steps = 0;
};

// Step halving with Richardson extrapolation until successive extrapolated
// values agree to `rel_tol` at every query time.
template <std::size_t Dim>
QueryResult<Dim> solve_at(const System<Dim>& sys, std::span<const double> times, double rel_tol = 1e-6,
                          std::size_t initial_steps = 0, std::size_t max_steps = 1u << 15) {
  QueryResult<Dim> res;
  if (times.empty()) return res;
  for (std::size_t q = 0; q < times.size(); ++q) {
    if (!(times[q] >= 0.0)) throw DomainError("renewal: times must be >= 0");
    if (q > 0 && times[q] < times[q - 1]) throw DomainError("renewal: times must be increasing");
  }
  const double t_max = times.back();
  if (t_max == 0.0) {
    res.value.assign(times.size(), sys.forcing);
    res.integral.assign(times.size(), std::array<double, Dim>{});
    return res;
  }
  std::size_t steps = initial_steps ? initial_steps
                                    : std::max<std::size_t>(32, static_cast<std::size_t>(std::ceil(16.0 * t_max)));

  auto sample = [&](const GridSolution<Dim>& g) {
    QueryResult<Dim> r;
    r.value.resize(times.size());
    r.integral.resize(times.size());
    std::vector<double> series(g.value.size());
    for (std::size_t i = 0; i < Dim; ++i) {
      for (std::size_t n = 0; n < series.size(); ++n) series[n] = g.value[n][i];
      for (std::size_t q = 0; q < times.size(); ++q) r.value[q][i] = detail::interpolate(series, g.step, times[q]);
      for (std::size_t n = 0; n < series.size(); ++n) series[n] = g.integral[n][i];
      for (std::size_t q = 0; q < times.size(); ++q)
        r.integral[q][i] = detail::interpolate(series, g.step, times[q]);
    }
    return r;
  };
  auto extrapolate = [&](const QueryResult<Dim>& coarse, const QueryResult<Dim>& fine) {
    QueryResult<Dim> r = fine;
    for (std::size_t q = 0; q < times.size(); ++q)
      for (std::size_t i = 0; i < Dim; ++i) {
        r.value[q][i] = fine.value[q][i] + (fine.value[q][i] - coarse.value[q][i]) / 3.0;
        r.integral[q][i] = fine.integral[q][i] + (fine.integral[q][i] - coarse.integral[q][i]) / 3.0;
      }
    return r;
  };
  auto max_rel_diff = [&](const QueryResult<Dim>& a, const QueryResult<Dim>& b) {
    double worst = 0.0;
    for (std::size_t q = 0; q < times.size(); ++q)
      for (std::size_t i = 0; i < Dim; ++i) {
        const double sv = std::max(std::abs(b.value[q][i]), 1e-12);
        const double si = std::max(std::abs(b.integral[q][i]), 1e-12);
        worst = std::max(worst, std::abs(a.value[q][i] - b.value[q][i]) / sv);
        worst = std::max(worst, std::abs(a.integral[q][i] - b.integral[q][i]) / si);
      }
    return worst;
  };

  QueryResult<Dim> coarse = sample(solve_trapezoidal(sys, t_max, steps));
  QueryResult<Dim> previous_extrapolated;
  bool have_previous = false;
  while (2 * steps <= max_steps) {
    steps *= 2;
    QueryResult<Dim> fine = sample(solve_trapezoidal(sys, t_max, steps));
    QueryResult<Dim> extrapolated = extrapolate(coarse, fine);
    if (have_previous && max_rel_diff(extrapolated, previous_extrapolated) < rel_tol) {
      extrapolated.steps = steps;
      return extrapolated;
    }
    previous_extrapolated = std::move(extrapolated);
    have_previous = true;
    coarse = std::move(fine);
  }
  throw NumericFailure("renewal: no convergence within the refinement budget");
}

}  // namespace hawkes_evolve::volterra
