#include "qstab/cli/commands.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "qstab/errors.hpp"
#include "qstab/inequalities.hpp"
#include "qstab/radial.hpp"
#include "qstab/random_fields.hpp"
#include "qstab/stability.hpp"

namespace qstab::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Task {
  std::function<std::vector<ReportRow>(Rng&)> run;
};

void prepare_output(const RunConfig& c) {
  std::error_code ec;
  std::filesystem::create_directories(c.output.dir, ec);
  if (ec) throw ConfigError("/output/dir: cannot create " + c.output.dir + ": " + ec.message());
}

std::string out_path(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.output.dir) / name).string();
}

// Runs fn, mapping library errors to exit codes and recording the message.
CommandResult guarded(const std::string& name, const std::function<void(CommandResult&)>& fn) {
  CommandResult r;
  try {
    fn(r);
  } catch (const ConfigError& e) {
    r.exit_code = kConfigError;
    r.error = name + ": configuration error: " + e.what();
  } catch (const AdmissibilityError& e) {
    r.exit_code = kConfigError;
    r.error = name + ": inadmissible potential: " + e.what();
  } catch (const DegenerateInputError& e) {
    r.exit_code = kConfigError;
    r.error = name + ": degenerate input: " + e.what();
  } catch (const InvalidInput& e) {
    r.exit_code = kConfigError;
    r.error = name + ": invalid input: " + e.what();
  } catch (const ConvergenceError& e) {
    r.exit_code = kNonConvergence;
    r.error = name + ": solver did not converge: " + e.what();
  }
  return r;
}

std::vector<Side> sides_of(Side s) {
  if (s == Side::both) return {Side::max, Side::min};
  return {s};
}

ReportRow stability_row(const std::string& side, double p, const std::string& domain, const StabilityReport& s) {
  ReportRow r;
  r.side = side;
  r.p = p;
  r.domain = domain;
  r.gap = s.gap;
  r.remainder = s.remainder;
  r.exponent = s.exponent;
  r.sigma = s.sigma;
  r.margin = s.margin;
  r.passed = s.passed;
  return r;
}

ReportRow deficit_row(const std::string& side, double q, const std::string& domain, const DeficitReport& d) {
  ReportRow r;
  r.side = side;
  r.p = q;
  r.domain = domain;
  r.gap = d.deficit;
  r.remainder = d.remainder;
  r.exponent = 1.0;
  r.sigma = d.constant;
  r.margin = d.margin;
  r.passed = d.passed;
  return r;
}

GridFunction unit(const GridFunction& u, double s) { return u * (1.0 / lp_norm(u, s)); }

json max_constants_json(const MaxExtremal& ex) {
  const ConstantsMax c = constants_max(ex);
  return {{"p", ex.p},
          {"c1", ex.c1},
          {"V0_norm", lp_norm(ex.V0.values, ex.p)},
          {"G_value", ex.G_value},
          {"energy", ex.energy},
          {"consistency", ex.consistency},
          {"state_distance", ex.state_distance},
          {"gradient_norm", ex.gradient_norm},
          {"iterations", ex.iterations},
          {"sigma_M_prime", c.sigma_M_prime},
          {"sigma_M_doubleprime", c.sigma_M_doubleprime},
          {"sigma_alt", c.sigma_alt},
          {"alt_exponent", c.alt_exponent},
          {"threshold", c.threshold}};
}

json min_constants_json(const MinExtremal& ex, const ConstantsMin& c) {
  return {{"p", ex.p},
          {"W0_norm", lp_norm(ex.W0.values, ex.p)},
          {"J_value", ex.J_value},
          {"energy", ex.energy},
          {"consistency", ex.consistency},
          {"gradient_norm", ex.gradient_norm},
          {"eps_final", ex.eps_final},
          {"iterations", ex.iterations},
          {"f_dual_norm", c.f_dual_norm},
          {"sobolev_exponent", c.sobolev_exponent},
          {"sobolev_constant", c.sobolev_constant},
          {"c2", c.c2},
          {"c3", c.c3},
          {"c4", c.c4},
          {"c5", c.c5},
          {"c6", c.c6},
          {"c7", c.c7},
          {"c8", c.c8},
          {"c9", c.c9},
          {"beta", c.beta},
          {"sigma_m", c.sigma_m},
          {"footnote_threshold", c.footnote_threshold},
          {"state_constant", c.state_constant}};
}

std::vector<std::vector<ReportRow>> execute(const std::vector<Task>& tasks, std::uint64_t seed, int threads,
                                            bool timing) {
  std::vector<std::vector<ReportRow>> out(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      try {
        Rng rng(derive_seed(seed, k));
        const auto t0 = Clock::now();
        out[k] = tasks[k].run(rng);
        const double ms = timing ? std::chrono::duration<double, std::milli>(Clock::now() - t0).count() : 0.0;
        for (auto& r : out[k]) r.ms = ms;
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

std::vector<ReportRow> run_verify_sweep(const RunConfig& c, json* summary) {
  std::vector<Task> tasks;
  json constants = {{"max", json::array()}, {"min", json::array()}};
  const int samples = c.sweep.samples;
  if (samples > 0) {
    const GridPtr grid = make_grid(c.domain);
    const std::string domain = to_string(c.domain.kind);
    const SourceTerm f = make_source(grid, c.problem.source);
    const SolverOptions lin = c.solver.linear;
    for (Side side : sides_of(c.problem.side)) {
      for (double p : c.problem.p) {
        if (side == Side::max) {
          auto ex = std::make_shared<const MaxExtremal>(minimize_G(p, f, c.solver.optimizer));
          constants["max"].push_back(max_constants_json(*ex));
          for (int k = 0; k < samples; ++k) {
            tasks.push_back({[=](Rng& rng) {
              const Potential V = random_max_potential(grid, rng, p);
              return std::vector<ReportRow>{
                  stability_row("max", p, domain, verify_max_stability(V, *ex, f, MaxFlavor::primary, lin)),
                  stability_row("max_alt", p, domain, verify_max_stability(V, *ex, f, MaxFlavor::alternate, lin))};
            }});
          }
        } else {
          auto ex = std::make_shared<const MinExtremal>(minimize_J(p, f, c.solver.optimizer));
          auto k_min = std::make_shared<const ConstantsMin>(constants_min(*ex, f, c.solver.optimizer.linear));
          constants["min"].push_back(min_constants_json(*ex, *k_min));
          for (int k = 0; k < samples; ++k) {
            tasks.push_back({[=](Rng& rng) {
              const ReciprocalPotential W = random_min_reciprocal(grid, rng, p);
              return std::vector<ReportRow>{
                  stability_row("min", p, domain, verify_min_stability(W, *ex, *k_min, f, lin))};
            }});
          }
        }
      }
    }
    if (c.sweep.inequalities) {
      const int m = c.sweep.inequality_samples;
      for (double q : {2.0, 3.0, 5.0}) {
        for (int k = 0; k < m; ++k) {
          tasks.push_back({[=](Rng& rng) {
            const double qp = q / (q - 1.0);
            const GridFunction a = unit(random_smooth_field(grid, rng, k % 2 == 0), q);
            GridFunction b = random_smooth_field(grid, rng);
            if (k % 3 == 0) b = signed_power(a, q) + 0.05 * b;
            b = unit(b, qp);
            return std::vector<ReportRow>{deficit_row("holder1", q, domain, quantitative_holder(a, b, q, 1)),
                                          deficit_row("holder2", q, domain, quantitative_holder(a, b, q, 2))};
          }});
        }
      }
      for (double q : {1.25, 1.5, 2.0}) {
        for (int k = 0; k < m; ++k) {
          tasks.push_back({[=](Rng& rng) {
            const GridFunction a = unit(random_smooth_field(grid, rng), q);
            const GridFunction b = unit(random_smooth_field(grid, rng, k % 2 == 0), q);
            return std::vector<ReportRow>{deficit_row("clarkson", q, domain, clarkson_check(a, b, q))};
          }});
        }
      }
      const GridPtr rgrid = grid->radial() ? grid : Grid::make(Domain::radial3d(10.0), {400});
      for (double q : {1.0, 2.0, 4.0}) {
        for (int k = 0; k < m; ++k) {
          tasks.push_back({[=](Rng& rng) {
            const GridFunction u = random_smooth_field(rgrid, rng);
            return std::vector<ReportRow>{deficit_row("strauss", q, "radial3d", strauss_bound(u, q))};
          }});
        }
      }
    }
  }
  const auto parts = execute(tasks, c.sweep.seed, c.threads, c.output.timing);
  std::vector<ReportRow> rows;
  for (const auto& part : parts) {
    for (const auto& r : part) {
      rows.push_back(r);
      rows.back().id = static_cast<int>(rows.size()) - 1;
    }
  }
  if (summary) {
    std::map<std::pair<std::string, double>, json> groups;
    for (const auto& r : rows) {
      json& g = groups[{r.side, r.p}];
      if (g.is_null()) g = {{"side", r.side}, {"p", r.p}, {"rows", 0}, {"passed", 0}, {"min_margin", r.margin}};
      g["rows"] = g["rows"].get<int>() + 1;
      g["passed"] = g["passed"].get<int>() + (r.passed ? 1 : 0);
      g["min_margin"] = std::min(g["min_margin"].get<double>(), r.margin);
    }
    json list = json::array();
    for (auto& [key, g] : groups) list.push_back(g);
    (*summary)["theorems"] = list;
    (*summary)["constants"] = constants;
  }
  return rows;
}

CommandResult cmd_energy(const RunConfig& c) {
  return guarded("energy", [&](CommandResult& res) {
    prepare_output(c);
    const GridPtr grid = make_grid(c.domain);
    const SourceTerm f = make_source(grid, c.problem.source);
    const Potential V{GridFunction::constant(grid, c.problem.potential)};
    json j = {{"config_hash", config_hash(c)}, {"domain", grid->describe()}, {"potential", c.problem.potential}};
    try {
      const EnergyResult e = solve_state(V, f, c.solver.linear);
      j["energy"] = e.energy;
      j["energy_direct"] = e.energy_direct;
      j["residual"] = e.residual;
      j["iterations"] = e.iterations;
      write_profile_csv(out_path(c, "state.csv"), {"u"}, {&e.state});
      res.files.push_back("state.csv");
    } catch (const AdmissibilityError& e) {
      j["error"] = e.what();
      j["admissibility_margin"] = e.margin();
      write_json(out_path(c, "energy.json"), j);
      res.files.push_back("energy.json");
      throw;
    }
    write_json(out_path(c, "energy.json"), j);
    res.files.push_back("energy.json");
  });
}

CommandResult cmd_optimize(const RunConfig& c) {
  return guarded("optimize", [&](CommandResult& res) {
    prepare_output(c);
    const GridPtr grid = make_grid(c.domain);
    const SourceTerm f = make_source(grid, c.problem.source);
    json j = {{"config_hash", config_hash(c)}, {"domain", grid->describe()}, {"max", json::array()},
              {"min", json::array()}};
    std::ofstream table;
    std::vector<std::string> lines;
    for (Side side : sides_of(c.problem.side)) {
      for (double p : c.problem.p) {
        const std::string tag = format_double(p);
        if (side == Side::max) {
          const MaxExtremal ex = minimize_G(p, f, c.solver.optimizer);
          const ConstantsMax k = constants_max(ex);
          j["max"].push_back(max_constants_json(ex));
          const std::string name = "optimize_max_p" + tag + ".csv";
          write_profile_csv(out_path(c, name), {"v0", "V0"}, {&ex.v0, &ex.V0.values});
          res.files.push_back(name);
          const bool high = p >= 2.0;
          lines.push_back("max," + tag + "," + format_double(lp_norm(ex.V0.values, p)) + "," +
                          format_double(ex.energy) + "," + format_double(ex.consistency) + "," +
                          format_double(ex.c1) + ",,,,,,,,,2," +
                          format_double(high ? k.sigma_M_prime : k.sigma_M_doubleprime) + "," +
                          format_double(k.alt_exponent) + "," + format_double(k.sigma_alt));
        } else {
          const MinExtremal ex = minimize_J(p, f, c.solver.optimizer);
          const ConstantsMin k = constants_min(ex, f, c.solver.optimizer.linear);
          j["min"].push_back(min_constants_json(ex, k));
          const std::string name = "optimize_min_p" + tag + ".csv";
          write_profile_csv(out_path(c, name), {"u0", "W0"}, {&ex.u0, &ex.W0.values});
          res.files.push_back(name);
          std::string row = "min," + tag + "," + format_double(lp_norm(ex.W0.values, p)) + "," +
                            format_double(ex.energy) + "," + format_double(ex.consistency) + ",";
          for (double v : {k.c2, k.c3, k.c4, k.c5, k.c6, k.c7, k.c8, k.c9}) row += "," + format_double(v);
          row += "," + format_double(k.beta) + "," + format_double(k.sigma_m) + ",,";
          lines.push_back(row);
        }
      }
    }
    {
      std::ofstream out(out_path(c, "optimize.csv"), std::ios::binary | std::ios::trunc);
      out << "side,p,norm,energy,consistency,c1,c2,c3,c4,c5,c6,c7,c8,c9,beta,sigma,alt_exponent,sigma_alt\n";
      for (const auto& l : lines) out << l << '\n';
    }
    res.files.push_back("optimize.csv");
    write_json(out_path(c, "optimize.json"), j);
    res.files.push_back("optimize.json");
  });
}

CommandResult cmd_verify(const RunConfig& c) {
  return guarded("verify", [&](CommandResult& res) {
    prepare_output(c);
    json cfg = to_json(c);
    cfg["output"].erase("dir");
    json j = {{"config_hash", config_hash(c)}, {"seed", c.sweep.seed}, {"config", cfg}};
    if (c.sweep.samples == 0) res.warnings.push_back("sample count is 0: the report is empty");
    res.rows = run_verify_sweep(c, &j);
    write_report_csv(out_path(c, "verify.csv"), res.rows);
    res.files.push_back("verify.csv");
    int passed = 0;
    for (const auto& r : res.rows) passed += r.passed ? 1 : 0;
    j["rows"] = res.rows.size();
    j["passed"] = passed;
    j["all_passed"] = passed == static_cast<int>(res.rows.size());
    write_json(out_path(c, "verify.json"), j);
    res.files.push_back("verify.json");
    if (passed != static_cast<int>(res.rows.size())) {
      res.exit_code = kVerificationFailure;
      res.error = "verify: " + std::to_string(res.rows.size() - passed) + " of " +
                  std::to_string(res.rows.size()) + " rows failed";
    }
  });
}

CommandResult cmd_decay(const RunConfig& c) {
  return guarded("decay", [&](CommandResult& res) {
    prepare_output(c);
    const DecaySpec& d = c.decay;
    const GridPtr grid = Grid::make(Domain::radial3d(d.truncation_radius), {d.resolution});
    const RadialProblem prob =
        make_radial_problem(power_tail_source(grid, d.C, d.alpha), d.q, d.a, d.alpha, d.R, d.C);
    require_decay_hypothesis(prob);
    const double tol = 1e-10;
    const GridFunction u = solve_semilinear_radial(prob, tol);
    const double c2 = c2_from_coefficient(prob);
    const DecayFit fit = decay_fit(u, prob);
    const LinftyReport lb = linfty_bound(u, prob, c2, tol);
    const ComparisonReport cmp = comparison_check(u, prob, c2);
    const BootstrapReport bs = weak_decay_bootstrap(u, prob);

    std::string rows = "power_tail," + format_double(d.q) + "," + format_double(d.alpha) + "," +
                       format_double(fit.lo) + "," + format_double(fit.hi) + "," + format_double(fit.slope) + "," +
                       format_double(fit.intercept) + "," + format_double(fit.rms) + "," +
                       format_double(fit.expected_slope) + "," + (fit.slope_ok ? "true" : "false") + "," +
                       (fit.power_law ? "true" : "false") + ",\n";
    bool passed = fit.slope_ok && fit.power_law && lb.passed && cmp.passed && bs.steps_verified >= 3;

    json j = {{"config_hash", config_hash(c)},
              {"fit", {{"lo", fit.lo}, {"hi", fit.hi}, {"slope", fit.slope}, {"intercept", fit.intercept},
                       {"rms", fit.rms}, {"expected_slope", fit.expected_slope}, {"slope_ok", fit.slope_ok},
                       {"power_law", fit.power_law}, {"nodes", fit.nodes}}},
              {"linfty", {{"M", lb.M}, {"inner_max", lb.inner_max}, {"tail_threshold", lb.tail_threshold},
                          {"max_u", lb.max_u}, {"slack", lb.slack}, {"passed", lb.passed}}},
              {"comparison", {{"found", cmp.found}, {"T", cmp.T}, {"scale", cmp.scale},
                              {"worst_ratio", cmp.worst_ratio}, {"T1", cmp.T1},
                              {"truncation_adequate", cmp.truncation_adequate}, {"passed", cmp.passed},
                              {"note", cmp.note}}},
              {"bootstrap", {{"beta0", bs.beta0}, {"gamma", bs.gamma}, {"nothing_to_prove", bs.nothing_to_prove},
                             {"strauss_passed", bs.strauss.passed}, {"exponents", bs.exponents},
                             {"constants", bs.constants}, {"steps_verified", bs.steps_verified},
                             {"deepest", bs.deepest}}}};

    if (d.manufactured) {
      const GridPtr mg = Grid::make(Domain::radial3d(d.manufactured_truncation), {d.resolution});
      const double q = d.q, a = d.a;
      const GridFunction mf = GridFunction::sample(mg, [q, a](auto x) {
        const double s = x[0] * x[0];
        return 12.0 * (1.0 - s) / std::pow(1.0 + s, 4) + a * std::pow(1.0 + s, -2.0 * (q - 1.0));
      });
      const RadialProblem mp = make_radial_problem(mf, q, a, 4.0 * (q - 1.0), d.R);
      const GridFunction um = solve_semilinear_radial(mp, tol);
      double err = 0.0;
      for (std::size_t i = 0; i < um.size(); ++i) {
        const double r = mg->coordinate(i, 0);
        err = std::max(err, std::abs(um[i] - std::pow(1.0 + r * r, -2.0)));
      }
      const DecayFit mfit = decay_fit(um, mp);
      rows += "manufactured," + format_double(q) + "," + format_double(mp.alpha) + "," + format_double(mfit.lo) +
              "," + format_double(mfit.hi) + "," + format_double(mfit.slope) + "," +
              format_double(mfit.intercept) + "," + format_double(mfit.rms) + "," +
              format_double(mfit.expected_slope) + "," + (mfit.slope_ok ? "true" : "false") + "," +
              (mfit.power_law ? "true" : "false") + "," + format_double(err) + "\n";
      j["manufactured"] = {{"recovery_error", err}, {"tolerance", d.recovery_tolerance},
                           {"passed", err <= d.recovery_tolerance}};
      passed = passed && err <= d.recovery_tolerance;
    }
    j["passed"] = passed;
    {
      std::ofstream out(out_path(c, "decay.csv"), std::ios::binary | std::ios::trunc);
      out << "case,q,alpha,lo,hi,slope,intercept,rms,expected_slope,slope_ok,power_law,recovery_error\n" << rows;
    }
    res.files.push_back("decay.csv");
    write_profile_csv(out_path(c, "decay_profile.csv"), {"u", "w"}, {&u, &cmp.w});
    res.files.push_back("decay_profile.csv");
    {
      std::ofstream out(out_path(c, "decay_loglog.csv"), std::ios::binary | std::ios::trunc);
      out << "log_rho,log_u\n";
      for (std::size_t i = 1; i < u.size(); ++i) {
        if (u[i] > 0.0) out << format_double(std::log(grid->coordinate(i, 0))) << ',' << format_double(std::log(u[i])) << '\n';
      }
    }
    res.files.push_back("decay_loglog.csv");
    write_json(out_path(c, "decay.json"), j);
    res.files.push_back("decay.json");
    if (!passed) {
      res.exit_code = kVerificationFailure;
      res.error = "decay: verification failed (see decay.json)";
    }
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical toolkit for quantitative stability of Schrodinger energies"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* config_opt = app.add_option("--config", config_path, "JSON run configuration");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "sweep seed (overrides the config)");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  auto* energy = app.add_subcommand("energy", "solve the state equation and report the energy");
  auto* optimize = app.add_subcommand("optimize", "compute the extremal potentials and constants");
  auto* verify = app.add_subcommand("verify", "run the randomized stability and inequality sweeps");
  auto* decay = app.add_subcommand("decay", "radial decay study of the minimizer");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "qstab: " << e.what() << '\n';
    return kConfigError;
  }

  RunConfig config;
  try {
    config = *config_opt ? load_config(config_path) : parse_config(json::object());
  } catch (const ConfigError& e) {
    err << "qstab: configuration error: " << e.what() << '\n';
    return kConfigError;
  }
  if (*out_opt) config.output.dir = out_dir;
  if (*seed_opt) config.sweep.seed = seed;
  if (*threads_opt) config.threads = threads;

  CommandResult r;
  if (energy->parsed()) r = cmd_energy(config);
  else if (optimize->parsed()) r = cmd_optimize(config);
  else if (verify->parsed()) r = cmd_verify(config);
  else if (decay->parsed()) r = cmd_decay(config);
  for (const auto& w : r.warnings) err << "qstab: warning: " << w << '\n';
  for (const auto& f : r.files) out << (std::filesystem::path(config.output.dir) / f).string() << '\n';
  if (!r.rows.empty() || verify->parsed()) {
    int passed = 0;
    for (const auto& row : r.rows) passed += row.passed ? 1 : 0;
    out << passed << '/' << r.rows.size() << " rows passed\n";
  }
  if (!r.error.empty()) err << "qstab: " << r.error << '\n';
  return r.exit_code;
}

}  // namespace qstab::cli
