#include "dplab/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "dplab/checks.hpp"
#include "dplab/errors.hpp"
#include "dplab/experiments.hpp"
#include "dplab/report.hpp"

namespace dplab {

namespace fs = std::filesystem;

void to_json(nlohmann::json& j, const RunConfig& c) {
  j["subcommand"] = c.subcommand;
  j["growth"] = c.growth;
  j["growth_level"] = c.growth_level;
  j["q"] = c.q;
  j["mu"] = c.mu;
  j["s"] = c.s;
  j["alpha"] = c.alpha;
  j["eps"] = c.eps;
  j["depth"] = c.depth;
  j["kappa"] = c.kappa;
  j["quad_levels"] = c.quad_levels;
  j["nodes"] = c.nodes;
  j["grading_levels"] = c.grading_levels;
  j["obstacle"] = c.obstacle;
  j["eps0"] = c.eps0;
  j["eps_min"] = c.eps_min;
  j["delta0"] = c.delta0;
  j["delta_min"] = c.delta_min;
  j["max_iter"] = c.max_iter;
  j["levels"] = c.levels;
  j["probes"] = c.probes;
  j["blowup_lo"] = c.blowup_lo;
  j["blowup_hi"] = c.blowup_hi;
  j["solve_blowup"] = c.solve_blowup;
  j["discrete_check"] = c.discrete_check;
  j["output"] = c.output;
  j["seed"] = c.seed;
}

// missing keys keep their defaults
void from_json(const nlohmann::json& j, RunConfig& c) {
  c.subcommand = j.value("subcommand", c.subcommand);
  c.growth = j.value("growth", c.growth);
  c.growth_level = j.value("growth_level", c.growth_level);
  c.q = j.value("q", c.q);
  c.mu = j.value("mu", c.mu);
  c.s = j.value("s", c.s);
  c.alpha = j.value("alpha", c.alpha);
  c.eps = j.value("eps", c.eps);
  c.depth = j.value("depth", c.depth);
  c.kappa = j.value("kappa", c.kappa);
  c.quad_levels = j.value("quad_levels", c.quad_levels);
  c.nodes = j.value("nodes", c.nodes);
  c.grading_levels = j.value("grading_levels", c.grading_levels);
  c.obstacle = j.value("obstacle", c.obstacle);
  c.eps0 = j.value("eps0", c.eps0);
  c.eps_min = j.value("eps_min", c.eps_min);
  c.delta0 = j.value("delta0", c.delta0);
  c.delta_min = j.value("delta_min", c.delta_min);
  c.max_iter = j.value("max_iter", c.max_iter);
  c.levels = j.value("levels", c.levels);
  c.probes = j.value("probes", c.probes);
  c.blowup_lo = j.value("blowup_lo", c.blowup_lo);
  c.blowup_hi = j.value("blowup_hi", c.blowup_hi);
  c.solve_blowup = j.value("solve_blowup", c.solve_blowup);
  c.discrete_check = j.value("discrete_check", c.discrete_check);
  c.output = j.value("output", c.output);
  c.seed = j.value("seed", c.seed);
}

std::string to_json(const RunConfig& c) { return nlohmann::json(c).dump(2); }

RunConfig run_config_from_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text).get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("config: ") + e.what());
  }
}

namespace {

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw InvalidConfig("cannot write " + p.string());
  os << content;
}

fs::path prepare_output(const RunConfig& c) {
  const fs::path dir(c.output);
  fs::create_directories(dir);
  write_file(dir / (c.subcommand + ".config.json"), to_json(c));
  if (!fs::exists(dir / "csv_schema.md")) write_file(dir / "csv_schema.md", csv_schema());
  return dir;
}

IntegrandSpec integrand_of(const RunConfig& c) {
  IntegrandSpec s;
  if (c.growth == "log") s.growth = GrowthFunction::logarithmic();
  else if (c.growth == "iterated-log") s.growth = GrowthFunction::iterated_log(c.growth_level);
  else if (c.growth == "constant-one") s.growth = GrowthFunction::constant_one();
  else throw InvalidConfig("unknown growth kind: " + c.growth);
  s.q = c.q;
  s.mu = c.mu;
  s.s = c.s;
  s.validate();
  return s;
}

CounterexampleConfig counterexample_of(const RunConfig& c) {
  CounterexampleConfig cc;
  cc.cantor = {2, c.eps, c.depth};
  cc.alpha = c.alpha;
  cc.q = c.q;
  cc.kappa = c.kappa;
  cc.integrand = integrand_of(c);
  cc.integrand.s = 0.0;
  cc.validate();
  return cc;
}

int cmd_cantor(const RunConfig& c) {
  const fs::path dir = prepare_output(c);
  const CantorApprox approx({2, c.eps, c.depth});
  nlohmann::json j = nlohmann::json::parse(to_text(approx));
  j["box_counting_slope"] = approx.box_counting_slope(std::max(1, c.depth - 6), c.depth);
  write_file(dir / "cantor.json", j.dump(2));
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_solve(const RunConfig& c) {
  const fs::path dir = prepare_output(c);
  auto grid = std::make_shared<const Grid>(2, c.nodes, Grading{0.5, c.grading_levels});
  ObstacleProblem p;
  p.grid = grid;
  p.integrand = integrand_of(c);
  p.alpha = c.alpha;
  const double alpha = c.alpha;
  p.a = [alpha](std::span<const double> x) { return std::min(1.0, std::pow(std::abs(x[1]), alpha)); };
  p.boundary = GridFunction(grid, [](std::span<const double> x) { return 0.5 * x[0] + 0.25 * x[1] * x[1]; });
  if (c.obstacle > -1e300) p.obstacle = GridFunction(grid, c.obstacle);
  RegularizationSchedule sched = RegularizationSchedule::geometric(c.eps0, c.eps_min, c.delta0, c.delta_min);
  sched.options.max_iter = c.max_iter;
  GridFunction u;
  const auto fam = regularized_family(p, sched, &u);
  write_file(dir / "family.csv", to_csv(fam));
  std::ofstream os(dir / "solution.csv");
  write_csv(os, u);
  SolveReport rep;
  rep.energy = energy(p, u).total;
  rep.iterations = fam.back().iterations;
  rep.converged = fam.back().converged;
  rep.max_grad_interior = max_gradient_in(u, Box::cube(2, 0.5));
  write_file(dir / "report.json", to_json(rep));
  std::cout << to_csv(fam);
  const bool ok = std::all_of(fam.begin(), fam.end(), [](const FamilyEntry& e) { return e.converged; });
  return ok ? kOk : kNotConverged;
}

int cmd_gap(const RunConfig& c) {
  const fs::path dir = prepare_output(c);
  QuadratureOptions qo;
  qo.grading_levels = c.quad_levels;
  const CounterexampleConfig chosen = select_parameters(counterexample_of(c), c.kappa, qo);
  CertificateOptions co;
  co.quadrature = qo;
  co.discrete_check = c.discrete_check;
  const GapCertificate cert = lavrentiev_certificate(chosen, co);
  write_file(dir / "certificate.json", to_json(cert));
  write_file(dir / "gap.svg", gap_plot(cert));
  std::cout << to_json(cert) << '\n';
  return cert.valid ? kOk : kInvalidCertificate;
}

SweepOptions sweep_options(const RunConfig& c) {
  SweepOptions so;
  so.nodes = c.levels;
  so.probes = c.probes;
  so.eps = c.eps;
  so.cantor_depth = c.depth;
  so.solver.max_iter = c.max_iter;
  return so;
}

int cmd_sweep(const RunConfig& c) {
  const fs::path dir = prepare_output(c);
  const SweepReport rep = regularity_sweep(default_sweep_cells(), sweep_options(c));
  write_file(dir / "sweep.csv", to_csv(rep));
  write_file(dir / "energy.svg", energy_plot(rep));
  write_file(dir / "max_grad.svg", gradient_growth_plot(rep));
  nlohmann::json j;
  j["fit_slope"] = rep.fit_slope;
  j["fit_r2"] = rep.fit_r2;
  for (const auto& cell : rep.cells)
    j["cells"].push_back({{"label", cell.cell.label}, {"ratios", cell.ratios}, {"flagged", cell.flagged},
                          {"note", cell.note}});
  write_file(dir / "sweep_summary.json", j.dump(2));
  std::cout << to_csv(rep);
  for (const auto& cell : rep.cells)
    if (cell.flagged) return kNotConverged;
  return kOk;
}

int cmd_blowup(const RunConfig& c) {
  const fs::path dir = prepare_output(c);
  CounterexampleConfig cc = counterexample_of(c);
  const SweepOptions so = sweep_options(c);
  const BlowupTable t = sobolev_blowup_diagnostic(cc, c.probes, c.blowup_lo, c.blowup_hi,
                                                  c.solve_blowup ? &so : nullptr);
  write_file(dir / "blowup.csv", to_csv(t));
  write_file(dir / "blowup.svg", blowup_plot(t));
  std::cout << to_csv(t);
  if (c.solve_blowup)
    std::cout << "# discrete minimisers observed; link to the continuum minimiser is heuristic\n"
              << "# growth onset bracket: [" << t.onset_low << ", " << t.onset_high << "]\n";
  return kOk;
}

int cmd_approx(const RunConfig& c) {
  const fs::path dir = prepare_output(c);
  auto grid = std::make_shared<const Grid>(2, c.nodes);
  const GridFunction w(grid, [](std::span<const double> x) { return std::sin(2.0 * x[0]) * std::cos(x[1]); });
  const GridFunction psi(grid, -1.0);
  std::vector<double> eps_list;
  const double hmax = 2.0 / (c.nodes - 1);
  for (double e = c.eps0; e >= 2.0 * hmax * (1.0 - 1e-12); e *= 0.5) eps_list.push_back(e);
  if (eps_list.empty()) throw InvalidConfig("eps0 below grid resolution");
  const double alpha = c.alpha;
  const auto rows = approximation_convergence(
      w, psi, eps_list, integrand_of(c), [alpha](std::span<const double> x) { return std::pow(std::abs(x[1]), alpha); });
  write_file(dir / "approx.csv", to_csv(rows));
  std::cout << to_csv(rows);
  return kOk;
}

int cmd_check(const RunConfig& c) {
  prepare_output(c);
  auto results = ellipticity_suite(c.seed);
  const auto more = structural_suite(c.seed);
  results.insert(results.end(), more.begin(), more.end());
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed() ? "ok   " : "FAIL ") << r.name << "  samples=" << r.samples
              << " violations=" << r.violations << '\n';
    ok = ok && r.passed();
  }
  return ok ? kOk : kInvalidConfig;
}

}  // namespace

int run(int argc, char** argv) {
  RunConfig cfg;
  // a config file supplies defaults; flags on the command line override it
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream is(argv[i + 1]);
      if (!is) {
        std::cerr << "error: cannot read config " << argv[i + 1] << '\n';
        return kInvalidConfig;
      }
      try {
        cfg = run_config_from_json(std::string(std::istreambuf_iterator<char>(is), {}));
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalidConfig;
      }
    }
  }

  CLI::App app{"Double phase energies at nearly linear growth: solver, counterexample and diagnostics"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override)");
  app.add_option("--growth", cfg.growth, "log | iterated-log | constant-one")->capture_default_str();
  app.add_option("--growth-level", cfg.growth_level, "iterated-log level")->capture_default_str();
  app.add_option("--q", cfg.q, "exponent of the a-phase")->capture_default_str();
  app.add_option("--mu", cfg.mu, "ellipticity exponent")->capture_default_str();
  app.add_option("--s", cfg.s, "shift in (s^2 + |z|^2)^(q/2)")->capture_default_str();
  app.add_option("--alpha", cfg.alpha, "Hoelder exponent of a")->capture_default_str();
  app.add_option("--eps", cfg.eps, "Cantor codimension defect")->capture_default_str();
  app.add_option("--depth", cfg.depth, "Cantor depth J")->capture_default_str();
  app.add_option("--kappa", cfg.kappa, "selection constant")->capture_default_str();
  app.add_option("--quad-levels", cfg.quad_levels, "quadrature grading levels")->capture_default_str();
  app.add_option("--nodes", cfg.nodes, "grid nodes per axis")->capture_default_str();
  app.add_option("--grading-levels", cfg.grading_levels, "extra graded layers near x_2 = 0")->capture_default_str();
  app.add_option("--obstacle", cfg.obstacle, "constant obstacle level")->capture_default_str();
  app.add_option("--eps0", cfg.eps0, "first regularisation eps")->capture_default_str();
  app.add_option("--eps-min", cfg.eps_min, "last regularisation eps")->capture_default_str();
  app.add_option("--delta0", cfg.delta0, "first smoothing radius")->capture_default_str();
  app.add_option("--delta-min", cfg.delta_min, "last smoothing radius")->capture_default_str();
  app.add_option("--max-iter", cfg.max_iter, "solver iteration cap")->capture_default_str();
  app.add_option("--levels", cfg.levels, "grid nodes per refinement level")->capture_default_str();
  app.add_option("--probes", cfg.probes, "probe exponents p")->capture_default_str();
  app.add_option("--blowup-lo", cfg.blowup_lo, "first grading level")->capture_default_str();
  app.add_option("--blowup-hi", cfg.blowup_hi, "last grading level")->capture_default_str();
  app.add_flag("--solve", cfg.solve_blowup, "also solve the discrete fractal problem (blowup)");
  app.add_flag("--discrete-check", cfg.discrete_check, "discrete cross-check of the certificate (gap)");
  app.add_option("-o,--output", cfg.output, "output directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "seed for sampled checks")->capture_default_str();

  const std::pair<const char*, const char*> subcommands[] = {
      {"solve", "solve an obstacle problem along the regularisation schedule"},
      {"gap", "parameter selection and Lavrentiev gap certificate"},
      {"sweep", "regularity sweep over coefficient cells and grids"},
      {"blowup", "Sobolev blow-up diagnostic of the competitor"},
      {"cantor", "Cantor set geometry and box-counting slope"},
      {"approx", "approximation lemma table for a smooth field"},
      {"check", "ellipticity and structural property suites"}};
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    if (cfg.subcommand == "cantor") return cmd_cantor(cfg);
    if (cfg.subcommand == "solve") return cmd_solve(cfg);
    if (cfg.subcommand == "gap") return cmd_gap(cfg);
    if (cfg.subcommand == "sweep") return cmd_sweep(cfg);
    if (cfg.subcommand == "blowup") return cmd_blowup(cfg);
    if (cfg.subcommand == "approx") return cmd_approx(cfg);
    return cmd_check(cfg);
  } catch (const InvalidConfig& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }
}

}  // namespace dplab
