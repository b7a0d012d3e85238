#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hawkes_evolve/errors.hpp"
#include "hawkes_evolve/expectations.hpp"
#include "hawkes_evolve/experiments.hpp"
#include "hawkes_evolve/population.hpp"
#include "hawkes_evolve/simulate.hpp"

namespace hawkes_evolve::io {

// Shortest round-trip decimal form; identical across runs and platforms.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// start:stop:step, inclusive of stop up to rounding.
inline std::vector<double> parse_grid(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? std::string::npos : spec.find(':', a + 1);
  if (b == std::string::npos || spec.find(':', b + 1) != std::string::npos)
    throw ParseError("grid '" + spec + "': expected start:stop:step");
  auto parse = [&](std::string_view s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v))
      throw ParseError("grid '" + spec + "': '" + std::string(s) + "' is not a number");
    return v;
  };
  const std::string_view sv(spec);
  const double start = parse(sv.substr(0, a));
  const double stop = parse(sv.substr(a + 1, b - a - 1));
  const double step = parse(sv.substr(b + 1));
  if (!(step > 0.0)) throw ParseError("grid '" + spec + "': step must be > 0");
  if (stop < start) throw ParseError("grid '" + spec + "': stop must be >= start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 10'000'000) throw ParseError("grid '" + spec + "': too many points");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = start + static_cast<double>(k) * step;
  return out;
}

enum class CurveQuantity { Intensity, Count };

// Columns t, value, method, index; one file per quantity.
inline void write_expectations_csv(std::ostream& os, std::span<const ExpectationCurve> curves,
                                   CurveQuantity quantity = CurveQuantity::Intensity) {
  os << "t,value,method,index\n";
  for (const auto& c : curves) {
    const auto& values = quantity == CurveQuantity::Intensity ? c.intensity : c.count;
    for (std::size_t q = 0; q < c.times.size(); ++q)
      os << num(c.times[q]) << ',' << num(values[q]) << ',' << method_name(c.method) << ',' << c.index << '\n';
  }
}

inline void write_events_csv(std::ostream& os, const EventLog& log) {
  os << "time,mark,n1,n2,n3,N\n";
  Counts c = log.initial_counts();
  for (const auto& e : log.events()) {
    ++c[slot(e.mark)];
    os << num(e.time) << ',' << static_cast<int>(e.mark) << ',' << c[0] << ',' << c[1] << ',' << c[2] << ','
       << population_size(c) << '\n';
  }
}

inline void write_intensity_csv(std::ostream& os, std::span<const IntensitySample> samples) {
  os << "t,lambda1,lambda2,lambda3_gated\n";
  for (const auto& s : samples)
    os << num(s.t) << ',' << num(s.lambda[0]) << ',' << num(s.lambda[1]) << ',' << num(s.lambda[2]) << '\n';
}

inline void write_snapshot_csv(std::ostream& os, std::span<const PartitionSnapshot> snapshots) {
  os << "t,site_fitness,count\n";
  for (const auto& snap : snapshots)
    for (const auto& site : snap.sites) os << num(snap.t) << ',' << num(site.fitness) << ',' << site.count << '\n';
}

inline void write_lr_csv(std::ostream& os, std::span<const LRPoint> lr, double f) {
  os << "t,L,R,N,f\n";
  for (const auto& p : lr) os << num(p.t) << ',' << p.left << ',' << p.right << ',' << p.total() << ',' << num(f) << '\n';
}

inline nlohmann::json to_json(const Rates& r) { return nlohmann::json::array({r[0], r[1], r[2]}); }

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const RegimeReport& r) {
  return {{"lambda_asym_paper", to_json(r.lambda_paper)},
          {"lambda_asym_renewal", r.lambda_renewal ? to_json(*r.lambda_renewal) : nlohmann::json(nullptr)},
          {"fc_paper", r.fc_paper},
          {"fc_renewal", optional_json(r.fc_renewal)},
          {"regime", regime_name(r.regime)},
          {"regime_paper", regime_name(r.regime_paper)},
          {"basis", method_name(r.basis)}};
}

inline nlohmann::json to_json(const SweepResult& s) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : s.runs)
    runs.push_back({{"population", r.population},
                    {"right_at_fc", r.right_at_fc},
                    {"zero_occupation_fraction", r.zero_occupation_fraction}});
  return {{"f_grid", s.f_grid},
          {"horizon", s.horizon},
          {"runs", s.runs.size()},
          {"runs_with_sites", s.runs_with_sites},
          {"mean_cdf", s.mean_cdf},
          {"sup_distance_paper", optional_json(s.sup_distance_paper)},
          {"sup_distance_renewal", optional_json(s.sup_distance_renewal)},
          {"fc_hat", optional_json(s.fc_hat)},
          {"fc_used", s.fc_used},
          {"mean_right_fc_fraction", s.mean_right_fc_fraction},
          {"mean_gap", s.mean_gap},
          {"cdf_monotone", s.cdf_monotone},
          {"regime", to_json(s.regime)},
          {"per_run", runs}};
}

inline nlohmann::json to_json(const RhoReport& r) {
  return {{"f", r.f},
          {"epsilon", r.epsilon},
          {"horizon", r.horizon},
          {"runs", r.zero_returns.size()},
          {"runs_with_population", r.terminal_rho.size()},
          {"mean_rho", r.mean},
          {"se_rho", r.se},
          {"limit_paper", optional_json(r.limit_paper)},
          {"limit_renewal", optional_json(r.limit_renewal)},
          {"terminal_rho", r.terminal_rho},
          {"zero_returns", r.zero_returns}};
}

inline nlohmann::json to_json(const GofReport& g) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : g.processes) {
    nlohmann::json j = {{"index", p.index}, {"events", p.events}, {"insufficient_data", p.insufficient()}};
    if (p.ks) {
      j["ks_statistic"] = p.ks->statistic;
      j["p_value"] = p.ks->p_value;
    }
    out.push_back(j);
  }
  return {{"processes", out}};
}

inline nlohmann::json to_json(std::span<const DriftResult> rs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : rs)
    out.push_back({{"function", d.name},
                   {"analytic", d.analytic},
                   {"mc_mean", d.mc_mean},
                   {"se", d.se},
                   {"z", d.z},
                   {"passed", d.passed()}});
  return out;
}

inline nlohmann::json to_json(const OccupationSummary& s) {
  return {{"fractions", s.fractions}, {"min", s.min},       {"median", s.median}, {"q05", s.q05},
          {"q95", s.q95},             {"mean", s.mean},     {"se", s.se}};
}

}  // namespace hawkes_evolve::io
