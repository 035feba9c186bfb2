// Acceptance suite.  Prints one PASS/FAIL line per criterion; tolerances and
// runtime budgets are fixed here.  Usage: dplab_acceptance [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dplab/checks.hpp"
#include "dplab/experiments.hpp"
#include "dplab/fractal.hpp"
#include "dplab/grid.hpp"
#include "dplab/solver.hpp"
#include "oracle.hpp"

using namespace dplab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

IntegrandSpec log_spec(double q, double s) {
  IntegrandSpec sp;
  sp.growth = GrowthFunction::logarithmic();
  sp.q = q;
  sp.s = s;
  return sp;
}

SolverOptions tight() {
  SolverOptions o;
  o.pg_tol = 1e-11;
  o.rel_decrease = 1e-15;
  o.max_iter = 200000;
  return o;
}

// 1. gap certificate
Outcome gap_certificate() {
  CounterexampleConfig draft;
  draft.cantor = {2, 0.15, 10};
  draft.alpha = 0.5;
  draft.q = 1.8;
  draft.integrand = log_spec(1.8, 0.0);
  QuadratureOptions qo;
  qo.grading_levels = 12;
  const CounterexampleConfig chosen = select_parameters(draft, 0.5, qo);
  CertificateOptions co;
  co.quadrature = qo;
  const GapCertificate c = lavrentiev_certificate(chosen, co);
  const double p = c.pairing_raw.value;
  const double sm = c.config.m_star * c.config.sigma_star;
  const bool pass = p >= 0.98 && p <= 1.02 && c.inequality_67 && c.margin >= 0.10 && c.gap_lower > c.threshold &&
                    c.threshold > 0.375 * sm && c.valid;
  return {pass, fmt::format("pairing={:.6f} m*=2^{:.0f} sigma*={:.4g} margin={:.4f} gap_lower/threshold={:.4f}", p,
                            std::log2(c.config.m_star), c.config.sigma_star, c.margin, c.gap_lower / c.threshold)};
}

// 2. ellipticity suite
Outcome ellipticity() {
  const auto results = ellipticity_suite(20240601, 10000, 1e-8);
  long samples = 0, violations = 0;
  for (const auto& r : results) {
    samples += r.samples;
    violations += r.violations;
  }
  return {violations == 0 && !results.empty(),
          fmt::format("{} checks, {} samples, {} violations", results.size(), samples, violations)};
}

// 3. solver correctness
Outcome solver_correctness() {
  // oracle instance: a = 1, q = 1.8, s = 1, zero datum, centred bump obstacle of height 0.3
  auto grid = std::make_shared<const Grid>(2, 9);
  ObstacleProblem p;
  p.grid = grid;
  p.integrand = log_spec(1.8, 1.0);
  p.a = [](std::span<const double>) { return 1.0; };
  p.boundary = GridFunction(grid, 0.0);
  p.obstacle = GridFunction(grid, [](std::span<const double> x) {
    return 0.3 * std::max(0.0, 1.0 - 2.0 * (x[0] * x[0] + x[1] * x[1]));
  });
  IntegrandSpec sp = p.integrand;
  sp.delta_moll = 1e-6;
  const SolveResult r = minimize(p, sp, 0.0, tight());
  oracle::Instance in;
  in.a.assign(64, 1.0);
  in.boundary.assign(81, 0.0);
  in.obstacle.assign(p.obstacle->values().begin(), p.obstacle->values().end());
  const auto ref = oracle::Solver(in).solve();
  double sup = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) sup = std::max(sup, std::abs(ref[k] - r.u[k]));

  // maximum principle on randomised instances
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
  double worst_mp = 1e300;
  for (int t = 0; t < 20; ++t) {
    auto g = std::make_shared<const Grid>(2, t % 2 ? 17 : 9);
    ObstacleProblem q;
    q.grid = g;
    q.integrand = log_spec(1.2 + 0.7 * pos(rng), pos(rng));
    q.integrand.growth = t % 3 == 0 ? GrowthFunction::iterated_log(1) : GrowthFunction::logarithmic();
    const double amp = 3.0 * pos(rng), f1 = 1 + 3 * pos(rng), f2 = 1 + 3 * pos(rng), ca = pos(rng);
    q.boundary = GridFunction(g, [&](std::span<const double> x) { return amp * std::sin(f1 * x[0] + f2 * x[1]); });
    q.a = [ca](std::span<const double> x) { return ca * std::abs(x[1]); };
    const double height = 4.0 * pos(rng) - 1.0, cx = 0.5 * u(rng);
    q.obstacle = GridFunction(g, [&](std::span<const double> x) {
      return height - 3.0 * ((x[0] - cx) * (x[0] - cx) + x[1] * x[1]);
    });
    for (std::size_t k = 0; k < g->num_nodes(); ++k)
      if (g->is_boundary(k)) (*q.obstacle)[k] = std::min((*q.obstacle)[k], q.boundary[k]);
    IntegrandSpec qs = q.integrand;
    qs.delta_moll = 1e-4;
    const SolveResult rr = minimize(q, qs, 0.0, SolverOptions{});
    worst_mp = std::min({worst_mp, rr.report.max_principle_margin, rr.report.feasibility_margin});
  }

  // variational inequality on random feasible directions at the oracle instance
  const DiscreteEnergy E(p, sp, 0.0);
  std::vector<double> grad(r.u.size());
  E.value_and_gradient(r.u, grad);
  double worst_vi = 1e300;
  for (int t = 0; t < 100; ++t) {
    const double scale = std::pow(10.0, -3.0 * pos(rng));
    double dot = 0.0, nrm = 0.0;
    for (std::size_t k = 0; k < r.u.size(); ++k) {
      if (grid->is_boundary(k)) continue;
      const double v = std::max((*p.obstacle)[k], r.u[k] + scale * u(rng));
      dot += grad[k] * (v - r.u[k]);
      nrm += (v - r.u[k]) * (v - r.u[k]);
    }
    if (nrm > 0.0) worst_vi = std::min(worst_vi, dot / std::sqrt(nrm));
  }
  const bool pass = sup < 1e-6 && worst_mp >= -1e-8 && worst_vi >= -1e-6;
  return {pass, fmt::format("oracle sup diff={:.3g} min(max-principle, feasibility) margin={:.3g} min VI residual={:.3g}",
                            sup, worst_mp, worst_vi)};
}

// 4. regularised family
Outcome family_convergence() {
  auto grid = std::make_shared<const Grid>(2, 17);
  struct Canon {
    const char* label;
    GrowthFunction growth;
    double mu;
    bool obstacle;
  };
  const Canon canon[] = {{"log", GrowthFunction::logarithmic(), 1.0, false},
                         {"log+obstacle", GrowthFunction::logarithmic(), 1.0, true},
                         {"iterated-log+obstacle", GrowthFunction::iterated_log(1), 1.2, true}};
  bool pass = true;
  std::string detail;
  for (const Canon& c : canon) {
    ObstacleProblem p;
    p.grid = grid;
    p.integrand.growth = c.growth;
    p.integrand.mu = c.mu;
    p.integrand.q = 1.5;
    p.integrand.s = 0.0;
    p.a = [](std::span<const double> x) { return std::sqrt(std::abs(x[1])); };
    p.boundary = GridFunction(grid, [](std::span<const double> x) { return x[0] + 0.5 * x[1] * x[1]; });
    if (c.obstacle)
      p.obstacle = GridFunction(grid, [](std::span<const double> x) { return 0.4 - 2.0 * (x[0] * x[0] + x[1] * x[1]); });
    auto sched = RegularizationSchedule::geometric(0.25, std::ldexp(1.0, -16), 1e-2, 1e-6);
    sched.options = tight();
    const auto fam = regularized_family(p, sched);
    double worst = 0.0;
    for (std::size_t k = 1; k < fam.size(); ++k)
      worst = std::max(worst, (fam[k].energy - fam[k - 1].energy) / std::abs(fam[k - 1].energy));
    const double last = std::abs(fam.back().energy - fam[fam.size() - 2].energy) / std::abs(fam.back().energy);
    const bool conv = std::all_of(fam.begin(), fam.end(), [](const FamilyEntry& e) { return e.converged; });
    const bool ok = worst <= 1e-8 && last <= 1e-4 && conv;
    pass = pass && ok;
    detail += fmt::format("[{}: {} steps, E={:.8g}, max rise={:.2g}, final rel diff={:.2g}{}] ", c.label, fam.size(), fam.back().energy, worst,
                          last, conv ? "" : ", not converged");
  }
  return {pass, detail};
}

// 5. Cantor geometry
Outcome cantor_geometry() {
  bool pass = true;
  std::string detail;
  for (double eps : {0.15, 0.5}) {
    const CantorApprox c({2, eps, 10});
    const double slope = c.box_counting_slope(4, 10);
    const auto iv = c.intervals();
    bool exact = iv.size() == 1024u && iv.front().lo == -0.5 && iv.back().hi == 0.5;
    double total = 0.0;
    for (std::size_t k = 0; k < iv.size(); ++k) {
      total += iv[k].length();
      exact = exact && std::abs(iv[k].length() - c.length(10)) <= 1e-15;
      if (k) exact = exact && iv[k].lo > iv[k - 1].hi;
      if (k % 2) exact = exact && std::abs((iv[k].lo - iv[k - 1].hi) - c.gap(10)) <= 1e-14;
    }
    exact = exact && std::abs(total - 1024.0 * c.length(10)) <= 1e-12;
    const auto parent = c.level_intervals(9);
    for (std::size_t k = 0; k < iv.size(); ++k)
      exact = exact && iv[k].lo >= parent[k / 2].lo && iv[k].hi <= parent[k / 2].hi;
    const bool ok = std::abs(slope - (1.0 - eps)) <= 0.05 && exact;
    pass = pass && ok;
    detail += fmt::format("[eps={}: slope={:.4f} target={:.2f} invariants {}] ", eps, slope, 1.0 - eps,
                          exact ? "exact" : "broken");
  }
  return {pass, detail};
}

// 6. integrability dichotomy of the competitor
Outcome integrability() {
  CounterexampleConfig c;
  c.cantor = {2, 0.15, 10};
  c.alpha = 0.5;
  c.q = 1.8;
  const double lo = 1.0 + 0.5 * c.cantor.eps, hi = 1.0 + 2.0 * c.cantor.eps;
  const BlowupTable t = sobolev_blowup_diagnostic(c, {lo, hi}, 4, 12);
  double drift = 0.0;
  for (double g : t.competitor[0].growth) drift = std::max(drift, std::abs(g - 1.0));
  const auto& gr = t.competitor[1].growth;
  const double min_growth = *std::min_element(gr.begin(), gr.end());
  const double max_growth = *std::max_element(gr.begin(), gr.end());
  const bool pass = drift < 0.02 && min_growth >= 1.5;
  return {pass, fmt::format("p={:.3f}: max drift={:.2g}; p={:.2f}: growth per level in [{:.3f}, {:.3f}] (need >= 1.5)", lo,
                            drift, hi, min_growth, max_growth)};
}

// 7. regularity sweep dichotomy
Outcome sweep_dichotomy() {
  SweepOptions o;
  o.nodes = {33, 65, 129};
  const SweepReport rep = regularity_sweep(default_sweep_cells(), o);
  bool pass = true;
  std::string detail;
  for (const auto& c : rep.cells) {
    const double ratio = c.ratios.empty() ? 0.0 : c.ratios.back();
    const bool conv = std::all_of(c.levels.begin(), c.levels.end(), [](const SweepLevel& l) { return l.converged; });
    const bool ok = !c.flagged && conv && (c.cell.fractal ? ratio > 1.5 : ratio < 1.1);
    pass = pass && ok;
    detail += fmt::format("[{}: ratio={:.4f}{}] ", c.cell.label, ratio, c.flagged ? " flagged" : "");
  }
  return {pass, detail};
}

// 8. approximation lemma
Outcome approximation() {
  auto g = std::make_shared<const Grid>(2, 257);
  const GridFunction psi(g, [](std::span<const double> x) { return 0.3 - (x[0] * x[0] + x[1] * x[1]); });
  const GridFunction w(g, [](std::span<const double> x) {
    const double b = 0.3 - (x[0] * x[0] + x[1] * x[1]);
    return b + 0.2 + 0.1 * std::sin(2.0 * x[0]) * std::cos(3.0 * x[1]);
  });
  IntegrandSpec spec = log_spec(1.5, 0.0);
  const std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125};
  const auto rows = approximation_convergence(w, psi, eps, spec,
                                              [](std::span<const double> x) { return std::sqrt(std::abs(x[1])); });
  bool feasible = true, bounded = true, monotone = true;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    feasible = feasible && rows[k].min_margin >= 0.0;
    bounded = bounded && rows[k].sup_norm <= rows[k].bound;
    if (k) monotone = monotone && rows[k].modular < rows[k - 1].modular;
  }
  const double finest = rows.back().modular;
  const bool pass = feasible && bounded && monotone && finest < 1e-3;
  return {pass, fmt::format("feasible={} bounded={} monotone={} modular at eps={}: {:.3g}", feasible, bounded,
                            monotone, eps.back(), finest)};
}

// 9. Wolff potential mapping
Outcome wolff() {
  auto g = std::make_shared<const Grid>(2, 129);
  const double sigma = 1.0, theta = 1.0;
  const double m = 2.0 * theta / sigma + 1.0;
  const double x0[2] = {0.0, 0.0};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> ratio, holder;
  for (int s = 0; s < 50; ++s) {
    const double amp = std::pow(10.0, 4.0 * u(rng) - 2.0), gamma = 0.5 + 1.5 * u(rng);
    CellField f{g, std::vector<double>(g->num_cells())};
    for (double& v : f.values) v = amp * std::pow(u(rng), gamma);
    double lm = 0.0;
    for (std::size_t c = 0; c < g->num_cells(); ++c) lm += std::pow(f.values[c], m) * g->cell_volume(c);
    const double norm = std::pow(lm, 1.0 / m);
    const WolffValue wv = wolff_potential(f, x0, 0.5, sigma, theta, m);
    ratio.push_back(wv.value / std::pow(norm, theta));
    holder.push_back(wv.value / (wv.holder_constant * std::pow(norm, theta)));
  }
  // C fitted on the first half, checked on all samples
  const double C = *std::max_element(ratio.begin(), ratio.begin() + 25);
  const double worst = *std::max_element(ratio.begin(), ratio.end()) / C;
  const double worst_holder = *std::max_element(holder.begin(), holder.end());
  const bool pass = worst <= 1.05 && worst_holder <= 1.0;
  return {pass, fmt::format("m={} fitted C={:.4g} max ratio/C={:.4f} max P/(Hoelder bound)={:.4f}", m, C, worst,
                            worst_holder)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "Lavrentiev gap certificate", 300.0, gap_certificate},
      {2, "ellipticity suite", 30.0, ellipticity},
      {3, "solver correctness", 120.0, solver_correctness},
      {4, "regularised family convergence", 180.0, family_convergence},
      {5, "Cantor geometry", 10.0, cantor_geometry},
      {6, "integrability dichotomy of the competitor", 60.0, integrability},
      {7, "regularity sweep dichotomy", 900.0, sweep_dichotomy},
      {8, "approximation lemma", 60.0, approximation},
      {9, "Wolff potential mapping", 30.0, wolff},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  bool all_pass = true;
  for (const Criterion& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    std::printf("criterion %d: %s  %s | %s | %.1f s (budget %.0f s)\n", c.id, pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
