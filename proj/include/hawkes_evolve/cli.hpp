#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hawkes_evolve/bank.hpp"
#include "hawkes_evolve/errors.hpp"
#include "hawkes_evolve/expectations.hpp"
#include "hawkes_evolve/experiments.hpp"
#include "hawkes_evolve/io.hpp"
#include "hawkes_evolve/population.hpp"
#include "hawkes_evolve/simulate.hpp"

namespace hawkes_evolve::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kInvalid = 2;

namespace detail {

struct Common {
  std::string bank_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool gnuplot = false;
};

inline void add_common(CLI::App& cmd, Common& c, bool needs_seed) {
  cmd.add_option("--bank", c.bank_path, "Kernel bank JSON file")->required()->check(CLI::ExistingFile);
  cmd.add_option("--out", c.out_dir, "Output directory (created if missing)")->capture_default_str();
  if (needs_seed) {
    cmd.add_option("--seed", c.seed, "Master seed")->capture_default_str();
    cmd.add_option("--threads", c.threads,
                   "Replication threads (0: HAWKES_EVOLVE_THREADS or hardware concurrency)")
        ->capture_default_str();
  }
}

inline KernelBank load_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open bank file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return bank_from_json_text(buf.str());
}

inline std::filesystem::path prepare_out(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec || !std::filesystem::is_directory(p)) throw ParseError("cannot create output directory " + dir);
  return p;
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  writer(os);
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

inline Engine parse_engine(const std::string& s) {
  if (s == "markov") return Engine::MarkovExact;
  if (s == "thinning") return Engine::ThinningHistory;
  throw ParseError("unknown engine '" + s + "'");
}

inline GeneratorPoint parse_state(const std::string& s, const KernelBank& bank) {
  GeneratorPoint z;
  z.l = bank.base_rates();
  if (s.empty()) return z;
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseError("state '" + s + "': '" + item + "' is not a number");
    }
  }
  if (v.size() != 6) throw ParseError("state '" + s + "': expected n1,n2,n3,l1,l2,l3");
  for (std::size_t i = 0; i < 3; ++i) {
    if (v[i] < 0 || v[i] != std::floor(v[i])) throw ParseError("state: counts must be non-negative integers");
    z.n[i] = static_cast<std::int64_t>(v[i]);
    z.l[i] = v[3 + i];
  }
  return z;
}

}  // namespace detail

// Executes one subcommand. Returns 0 on success, 1 when a check failed and
// 2 on invalid input, with a one-line diagnostic on `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"Hawkes-driven birth-death population model: expectations, simulation and experiments",
               "hawkes_evolve"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  Common c;

  // expect
  auto* expect = app.add_subcommand("expect", "Expectation curves E[lambda^i(t)] and E[N^i(t)]");
  add_common(*expect, c, true);
  double t_max = 0.0, t_step = 0.0;
  std::string method = "both";
  std::vector<int> indices{1, 2, 3};
  std::size_t mc_paths = 0;
  expect->add_option("--t-max", t_max, "Last time point")->required()->check(CLI::PositiveNumber);
  expect->add_option("--t-step", t_step, "Grid spacing (default t-max/200)")->check(CLI::PositiveNumber);
  expect->add_option("--method", method, "paper, renewal or both")
      ->check(CLI::IsMember({"paper", "renewal", "both"}))
      ->capture_default_str();
  expect->add_option("--index", indices, "Processes to evaluate (1, 2, 3)")->check(CLI::Range(1, 3));
  expect->add_option("--mc-paths", mc_paths, "Also estimate the mean intensities from this many paths (>= 2)");
  expect->add_flag("--gnuplot", c.gnuplot, "Also write a gnuplot script");

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one path of (N1, N2, N3)");
  add_common(*simulate_cmd, c, true);
  std::string engine = "markov", grid;
  double horizon = 0.0;
  std::uint64_t stream = 0, max_events = 10'000'000;
  simulate_cmd->add_option("--engine", engine, "markov or thinning")
      ->check(CLI::IsMember({"markov", "thinning"}))
      ->capture_default_str();
  simulate_cmd->add_option("--horizon", horizon, "Simulation horizon T")->required()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--stream", stream, "Replication index within the seed")->capture_default_str();
  simulate_cmd->add_option("--intensity-grid", grid, "Intensity sample times start:stop:step");
  simulate_cmd->add_option("--max-events", max_events, "Event cap")->capture_default_str();
  simulate_cmd->add_flag("--gnuplot", c.gnuplot, "Also write a gnuplot script");

  // population
  auto* population = app.add_subcommand("population", "Simulate the fitness-structured population");
  add_common(*population, c, true);
  double f = 0.5, epsilon = 0.0;
  std::string snapshot_grid;
  population->add_option("--engine", engine, "markov or thinning")
      ->check(CLI::IsMember({"markov", "thinning"}))
      ->capture_default_str();
  population->add_option("--horizon", horizon, "Simulation horizon T")->required()->check(CLI::PositiveNumber);
  population->add_option("--stream", stream, "Replication index within the seed")->capture_default_str();
  population->add_option("--f", f, "Fitness threshold for L/R")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  population->add_option("--snapshot-grid", snapshot_grid, "Partition snapshot times start:stop:step");
  population->add_flag("--gnuplot", c.gnuplot, "Also write a gnuplot script");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Phase-transition sweep of the site CDF over f");
  add_common(*sweep, c, true);
  std::string f_grid = "0:1:0.02";
  std::size_t runs = 50;
  double tolerance = -1.0;
  sweep->add_option("--f-grid", f_grid, "Fitness grid start:stop:step")->capture_default_str();
  sweep->add_option("--horizon", horizon, "Simulation horizon T")->required()->check(CLI::PositiveNumber);
  sweep->add_option("--runs", runs, "Independent runs")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--tolerance", tolerance,
                    "Fail (exit 1) when the sup distance to the limiting CDF exceeds this value");
  sweep->add_flag("--gnuplot", c.gnuplot, "Also write a gnuplot script");

  // rho
  auto* rho = app.add_subcommand("rho", "Terminal L/N of the modified chain against its limit");
  add_common(*rho, c, true);
  rho->add_option("--f", f, "Fitness threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  rho->add_option("--epsilon", epsilon, "Clone split in the (L > 0, R > 0) case")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  rho->add_option("--horizon", horizon, "Simulation horizon T")->required()->check(CLI::PositiveNumber);
  rho->add_option("--runs", runs, "Independent runs")->check(CLI::PositiveNumber)->capture_default_str();
  rho->add_option("--tolerance", tolerance, "Fail (exit 1) when |mean rho - limit| exceeds this value");

  // gof
  auto* gof = app.add_subcommand("gof", "Time-rescaling goodness of fit per process");
  add_common(*gof, c, true);
  std::string analysis_bank;
  gof->add_option("--engine", engine, "markov or thinning")
      ->check(CLI::IsMember({"markov", "thinning"}))
      ->capture_default_str();
  gof->add_option("--horizon", horizon, "Simulation horizon T")->required()->check(CLI::PositiveNumber);
  gof->add_option("--stream", stream, "Replication index within the seed")->capture_default_str();
  gof->add_option("--analysis-bank", analysis_bank, "Bank used for the compensator (default: --bank)")
      ->check(CLI::ExistingFile);

  // generator-check
  auto* generator = app.add_subcommand("generator-check", "MC drift of polynomial test functions vs the generator");
  add_common(*generator, c, true);
  std::string state;
  double h = 1e-3;
  std::size_t reps = 100'000;
  generator->add_option("--state", state, "n1,n2,n3,l1,l2,l3 (default: empty, l = lambda0)");
  generator->add_option("--dt", h, "Time step h")->check(CLI::PositiveNumber)->capture_default_str();
  generator->add_option("--reps", reps, "Replications")->check(CLI::Range(2ul, 1'000'000'000ul))->capture_default_str();

  // regime
  auto* regime = app.add_subcommand("regime", "Asymptotic rates, critical fitness and regime");
  add_common(*regime, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    if (const auto nl = msg.find('\n'); nl != std::string::npos) msg.resize(nl);
    err << "error: " << msg << '\n';
    return kInvalid;
  }

  try {
    const KernelBank bank = load_bank(c.bank_path);
    const auto dir = prepare_out(c.out_dir);
    const unsigned threads = resolve_threads(c.threads);

    if (expect->parsed()) {
      const double step = t_step > 0.0 ? t_step : t_max / 200.0;
      const auto times = io::parse_grid("0:" + io::num(t_max) + ":" + io::num(step));
      std::vector<ExpectationMethod> methods;
      if (method != "renewal") methods.push_back(ExpectationMethod::PaperClosedForm);
      if (method != "paper") methods.push_back(ExpectationMethod::NumericRenewal);
      std::vector<ExpectationCurve> curves;
      for (auto m : methods)
        for (int i : indices) curves.push_back(expectation_curve(bank, i, m, times));
      write_file(dir / "expectations.csv", [&](std::ostream& os) { io::write_expectations_csv(os, curves); });
      write_file(dir / "expected_counts.csv",
                 [&](std::ostream& os) { io::write_expectations_csv(os, curves, io::CurveQuantity::Count); });
      if (mc_paths > 0) {
        if (mc_paths < 2) throw DomainError("--mc-paths needs at least 2 paths");
        const auto rep = mc_mean_intensity(bank, times, mc_paths, {c.seed, threads, Engine::MarkovExact});
        write_file(dir / "mc_intensity.csv", [&](std::ostream& os) {
          os << "t,index,mean,se,paper,renewal\n";
          for (int i : indices) {
            const auto s = static_cast<std::size_t>(i - 1);
            for (std::size_t q = 0; q < times.size(); ++q)
              os << io::num(times[q]) << ',' << i << ',' << io::num(rep.mean[s][q]) << ',' << io::num(rep.se[s][q])
                 << ',' << (rep.paper[s].empty() ? "" : io::num(rep.paper[s][q])) << ','
                 << io::num(rep.renewal[s][q]) << '\n';
          }
        });
        for (int i : indices)
          out << "index " << i << ": MC means accepted by " << rep.matched(i) << " (max |z| paper "
              << io::num(rep.max_abs_z(i, ExpectationMethod::PaperClosedForm)) << ", renewal "
              << io::num(rep.max_abs_z(i, ExpectationMethod::NumericRenewal)) << ")\n";
      }
      if (c.gnuplot)
        write_file(dir / "expectations.gp", [](std::ostream& os) {
          os << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n"
                "set ylabel 'E[lambda(t)]'\n"
                "plot for [i=1:3] 'expectations.csv' using 1:($4==i && strcol(3) eq 'paper' ? $2 : 1/0) "
                "with lines title sprintf('paper %d', i), \\\n"
                "     for [i=1:3] 'expectations.csv' using 1:($4==i && strcol(3) eq 'renewal' ? $2 : 1/0) "
                "with lines dt 2 title sprintf('renewal %d', i)\n";
        });
      return kOk;
    }

    if (simulate_cmd->parsed()) {
      SimConfig cfg;
      cfg.horizon = horizon;
      cfg.seed = c.seed;
      cfg.stream = stream;
      cfg.engine = parse_engine(engine);
      cfg.max_events = max_events;
      if (!grid.empty()) cfg.intensity_grid = io::parse_grid(grid);
      const SimPath path = simulate(bank, cfg);
      write_file(dir / "events.csv", [&](std::ostream& os) { io::write_events_csv(os, path.events); });
      if (!grid.empty())
        write_file(dir / "intensity.csv", [&](std::ostream& os) { io::write_intensity_csv(os, path.intensity); });
      if (c.gnuplot)
        write_file(dir / "simulate.gp", [](std::ostream& os) {
          os << "set datafile separator ','\nset xlabel 't'\nset ylabel 'N(t)'\n"
                "plot 'events.csv' using 1:6 skip 1 with steps title 'N'\n";
        });
      out << path.events.size() << " events, N(T) = " << path.events.population() << '\n';
      return kOk;
    }

    if (population->parsed()) {
      SimConfig cfg;
      cfg.horizon = horizon;
      cfg.seed = c.seed;
      cfg.stream = stream;
      cfg.engine = parse_engine(engine);
      PopulationOptions opt;
      opt.f = f;
      if (!snapshot_grid.empty()) opt.snapshot_grid = io::parse_grid(snapshot_grid);
      const auto run = simulate_population(bank, cfg, opt);
      write_file(dir / "events.csv", [&](std::ostream& os) { io::write_events_csv(os, run.path.events); });
      write_file(dir / "snapshots.csv", [&](std::ostream& os) { io::write_snapshot_csv(os, run.snapshots); });
      write_file(dir / "lr.csv", [&](std::ostream& os) { io::write_lr_csv(os, run.lr, f); });
      if (c.gnuplot)
        write_file(dir / "population.gp", [](std::ostream& os) {
          os << "set datafile separator ','\nset xlabel 't'\n"
                "plot 'lr.csv' using 1:2 skip 1 with steps title 'L', 'lr.csv' using 1:3 skip 1 with steps title 'R'\n";
        });
      const auto [left, right] = left_right_counts(run.partition, f);
      out << "N(T) = " << run.partition.total() << ", sites = " << run.partition.site_count() << ", L = " << left
          << ", R = " << right << '\n';
      return kOk;
    }

    if (sweep->parsed()) {
      const auto fs = io::parse_grid(f_grid);
      const auto res = phase_transition_sweep(bank, fs, horizon, runs, {c.seed, threads});
      write_json(dir / "sweep.json", io::to_json(res));
      write_file(dir / "sweep.csv", [&](std::ostream& os) {
        os << "f,mean_cdf,theory_paper,theory_renewal,mean_gap\n";
        auto theory = [&](std::optional<double> fc, double x) {
          return fc && *fc < 1.0 ? io::num(theoretical_site_cdf(x, std::max(*fc, 0.0))) : std::string();
        };
        for (std::size_t k = 0; k < fs.size(); ++k)
          os << io::num(fs[k]) << ',' << io::num(res.mean_cdf[k]) << ',' << theory(res.regime.fc_paper, fs[k]) << ','
             << theory(res.regime.fc_renewal, fs[k]) << ',' << io::num(res.mean_gap[k]) << '\n';
      });
      if (c.gnuplot)
        write_file(dir / "sweep.gp", [](std::ostream& os) {
          os << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'f'\nset ylabel 'F_T(f)'\n"
                "plot 'sweep.csv' using 1:2 with points, '' using 1:3 with lines, '' using 1:4 with lines dt 2\n";
        });
      out << "regime " << regime_name(res.regime.regime) << ", f_c = " << io::num(res.regime.fc())
          << ", f_c estimate = " << (res.fc_hat ? io::num(*res.fc_hat) : "n/a") << '\n';
      if (tolerance >= 0.0) {
        const auto d = res.regime.basis == ExpectationMethod::NumericRenewal ? res.sup_distance_renewal
                                                                             : res.sup_distance_paper;
        if (!d || *d > tolerance) {
          err << "check failed: sup distance " << (d ? io::num(*d) : "undefined") << " exceeds " << io::num(tolerance)
              << '\n';
          return kCheckFailed;
        }
      }
      return kOk;
    }

    if (rho->parsed()) {
      const auto rep = rho_convergence_check(bank, f, epsilon, horizon, runs, {c.seed, threads});
      write_json(dir / "rho.json", io::to_json(rep));
      out << "mean rho = " << io::num(rep.mean) << " +- " << io::num(rep.se) << ", limit "
          << (rep.limit_renewal ? io::num(*rep.limit_renewal) : "n/a") << '\n';
      if (tolerance >= 0.0) {
        const auto limit = rep.limit_renewal ? rep.limit_renewal : rep.limit_paper;
        if (!limit || std::abs(rep.mean - *limit) > tolerance) {
          err << "check failed: mean rho " << io::num(rep.mean) << " is not within " << io::num(tolerance)
              << " of the limit\n";
          return kCheckFailed;
        }
      }
      return kOk;
    }

    if (gof->parsed()) {
      SimConfig cfg;
      cfg.horizon = horizon;
      cfg.seed = c.seed;
      cfg.stream = stream;
      cfg.engine = parse_engine(engine);
      const SimPath path = simulate(bank, cfg);
      const KernelBank analysis = analysis_bank.empty() ? bank : load_bank(analysis_bank);
      const auto rep = gof_report(path, analysis);
      write_json(dir / "gof.json", io::to_json(rep));
      bool ok = true;
      for (const auto& p : rep.processes) {
        out << "N" << p.index << ": " << p.events << " events";
        if (p.ks) {
          out << ", KS " << io::num(p.ks->statistic) << ", p = " << io::num(p.ks->p_value);
          ok = ok && p.ks->p_value > 0.01;
        } else {
          out << ", insufficient data";
        }
        out << '\n';
      }
      if (!ok) err << "check failed: a process rejects the unit-exponential fit at p <= 0.01\n";
      return ok ? kOk : kCheckFailed;
    }

    if (generator->parsed()) {
      const auto z = parse_state(state, bank);
      const auto fns = polynomial_test_functions();
      const auto res = generator_drift_check(bank, z, fns, {h, reps, c.seed, threads});
      write_json(dir / "generator.json", io::to_json(res));
      bool ok = true;
      for (const auto& d : res) {
        out << d.name << ": analytic " << io::num(d.analytic) << ", MC " << io::num(d.mc_mean) << " +- "
            << io::num(d.se) << ", z = " << io::num(d.z) << '\n';
        ok = ok && d.passed();
      }
      if (!ok) err << "check failed: |z| >= 3 for at least one test function\n";
      return ok ? kOk : kCheckFailed;
    }

    if (regime->parsed()) {
      const auto rep = classify_regime(bank);
      const auto j = io::to_json(rep);
      write_json(dir / "regime.json", j);
      out << j.dump(2) << '\n';
      return kOk;
    }
  } catch (const ExplosionGuardError& e) {
    err << "error: " << e.what() << " after " << e.path().events.size() << " events\n";
    return kCheckFailed;
  } catch (const NumericFailure& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const std::logic_error& e) {  // DomainError, UnsupportedError, PreconditionViolation, ...
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
  return kInvalid;
}

}  // namespace hawkes_evolve::cli
