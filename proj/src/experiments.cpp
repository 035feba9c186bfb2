#include <algorithm>
#include <cmath>
#include <sstream>

#include "dplab/errors.hpp"
#include "dplab/experiments.hpp"

namespace dplab {

namespace {

// Multilinear interpolation of a nodal field onto another tensor grid.
GridFunction prolong(const GridFunction& coarse, const GridPtr& fine) {
  const Grid& cg = coarse.grid();
  const int n = cg.dim();
  GridFunction out(fine, 0.0);
  for (std::size_t k = 0; k < fine->num_nodes(); ++k) {
    const Vector x = fine->node_point(k);
    int base[3];
    double t[3];
    for (int a = 0; a < n; ++a) {
      const auto c = cg.coords(a);
      auto it = std::upper_bound(c.begin(), c.end(), x[a]);
      int i = static_cast<int>(it - c.begin()) - 1;
      i = std::clamp(i, 0, static_cast<int>(c.size()) - 2);
      base[a] = i;
      t[a] = (x[a] - c[i]) / (c[i + 1] - c[i]);
    }
    double v = 0.0;
    for (int corner = 0; corner < (1 << n); ++corner) {
      int idx[3];
      double w = 1.0;
      for (int a = 0; a < n; ++a) {
        const int bit = (corner >> a) & 1;
        idx[a] = base[a] + bit;
        w *= bit ? t[a] : 1.0 - t[a];
      }
      if (w != 0.0) v += w * coarse[cg.node_index({idx, static_cast<std::size_t>(n)})];
    }
    out[k] = v;
  }
  return out;
}

double gradient_power_over(const GridFunction& u, double p, const Box& box) {
  const CellVectorField du = gradient(u);
  const CellField dens = map_cells(u.grid_ptr(), [&](std::size_t c) { return std::pow(du.norm_at(c), p); });
  return integrate_over(dens, box);
}

CounterexampleConfig fractal_config(const SweepCell& cell, const SweepOptions& opt) {
  CounterexampleConfig c;
  c.cantor = {2, opt.eps, opt.cantor_depth};
  c.alpha = cell.alpha;
  c.q = cell.q;
  c.m_star = cell.data_scale;
  c.sigma_star = std::pow(cell.data_scale, cell.alpha);
  return c;
}

}  // namespace

std::vector<SweepCell> default_sweep_cells() {
  return {
      {"smooth-q1.3", 1.3, 0.5, 1.0, 1.0, false, 1.0},
      {"smooth-q1.3-x2", 1.3, 0.5, 1.0, 1.0, false, 2.0},
      {"fractal-q1.8-m1e3", 1.8, 0.5, 1.0, 1.0, true, 1000.0},
  };
}

SweepCellReport run_sweep_cell(const SweepCell& cell, const SweepOptions& options) {
  SweepCellReport rep;
  rep.cell = cell;
  if (options.nodes.size() < 3) throw InvalidConfig("a sweep needs at least three refinement levels");
  try {
    IntegrandSpec spec;
    spec.growth = GrowthFunction::logarithmic();
    spec.mu = cell.mu;
    spec.q = cell.q;
    spec.s = cell.s;
    spec.validate();

    std::optional<Counterexample> ce;
    if (cell.fractal) ce.emplace(fractal_config(cell, options));

    const Box interior = Box::cube(2, 0.5);
    const Box probe_box = Box::cube(2, 7.0 / 8.0);
    std::optional<GridFunction> previous;
    for (int nodes : options.nodes) {
      auto grid = std::make_shared<const Grid>(2, nodes);
      ObstacleProblem prob;
      prob.grid = grid;
      prob.integrand = spec;
      prob.alpha = cell.alpha;
      if (ce) {
        const Counterexample* c = &*ce;
        prob.a = [c](std::span<const double> x) { return c->coefficient_a(x); };
        prob.boundary = GridFunction(grid, [c](std::span<const double> x) { return c->u0_tilde(x); });
      } else {
        const double alpha = cell.alpha, scale = cell.data_scale;
        prob.a = [alpha](std::span<const double> x) { return std::min(1.0, std::pow(std::abs(x[1]), alpha)); };
        prob.boundary = GridFunction(grid, [scale](std::span<const double> x) {
          return scale * (0.5 * x[0] + 0.25 * x[1] * x[1]);
        });
      }
      IntegrandSpec smoothed = spec;
      smoothed.delta_moll = options.delta;
      GridFunction init = previous ? prolong(*previous, grid) : prob.boundary;
      for (std::size_t k = 0; k < grid->num_nodes(); ++k)
        if (grid->is_boundary(k)) init[k] = prob.boundary[k];
      const SolveResult r = minimize(prob, smoothed, 0.0, options.solver, &init);

      SweepLevel lvl;
      lvl.nodes = nodes;
      lvl.max_grad = max_gradient_in(r.u, interior);
      lvl.energy = r.report.energy;
      lvl.iterations = r.report.iterations;
      lvl.converged = r.report.converged;
      for (double p : options.probes) lvl.gradient_integrals.push_back(gradient_power_over(r.u, p, probe_box));
      rep.levels.push_back(std::move(lvl));
      previous = r.u;
    }
    for (std::size_t k = 0; k + 1 < rep.levels.size(); ++k)
      rep.ratios.push_back(rep.levels[k + 1].max_grad / rep.levels[k].max_grad);
    const bool all_converged =
        std::all_of(rep.levels.begin(), rep.levels.end(), [](const SweepLevel& l) { return l.converged; });
    if (!all_converged) rep.note = "iteration cap reached on some level";
  } catch (const std::exception& e) {
    rep.flagged = true;
    rep.note = e.what();
  }
  return rep;
}

SweepReport regularity_sweep(const std::vector<SweepCell>& cells, const SweepOptions& options) {
  SweepReport report;
  report.cells.resize(cells.size());
  const auto m = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < m; ++i) report.cells[i] = run_sweep_cell(cells[i], options);

  // log max|Du| against log energy across data scalings of the smooth cells
  std::vector<std::pair<double, double>> pts;
  for (const auto& c : report.cells) {
    if (c.cell.fractal || c.flagged || c.levels.empty()) continue;
    const SweepLevel& fin = c.levels.back();
    if (fin.energy > 0.0 && fin.max_grad > 0.0) pts.emplace_back(std::log(fin.energy), std::log(fin.max_grad));
  }
  if (pts.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double k = static_cast<double>(pts.size());
    for (auto [x, y] : pts) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      syy += y * y;
    }
    const double vx = sxx - sx * sx / k, vy = syy - sy * sy / k, cxy = sxy - sx * sy / k;
    if (vx > 0.0) {
      report.fit_slope = cxy / vx;
      report.fit_r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    }
  }
  return report;
}

BlowupTable sobolev_blowup_diagnostic(const CounterexampleConfig& config, const std::vector<double>& probes,
                                      int level_lo, int level_hi, const SweepOptions* solved) {
  config.validate();
  if (level_lo < 1 || level_hi <= level_lo) throw InvalidConfig("need 1 <= level_lo < level_hi");
  BlowupTable t;
  const Counterexample ce(config);
  QuadratureOptions qo;
  qo.grading_levels = std::max(qo.grading_levels, level_hi);
  const FractalQuadrature fq(ce, qo);
  for (int k = level_lo; k <= level_hi; ++k) t.levels.push_back(k);
  for (double p : probes) {
    BlowupRow row;
    row.p = p;
    const double scale = std::pow(config.m_star, p);
    for (int k : t.levels)
      row.values.push_back(scale * fq.gradient_power_layered(p, std::ldexp(1.0, -k), 7.0 / 8.0, 3.0 / 8.0).value);
    for (std::size_t i = 0; i + 1 < row.values.size(); ++i) row.growth.push_back(row.values[i + 1] / row.values[i]);
    t.competitor.push_back(std::move(row));
  }

  if (solved) {
    SweepOptions so = *solved;
    so.probes = probes;
    so.eps = config.cantor.eps;
    so.cantor_depth = config.cantor.depth;
    SweepCell cell{"blowup", config.q, config.alpha, config.integrand.mu, 1.0, true, 1.0};
    const SweepCellReport rep = run_sweep_cell(cell, so);
    if (rep.flagged) throw InvalidConfig("blow-up solve failed: " + rep.note);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      BlowupRow row;
      row.p = probes[i];
      for (const SweepLevel& l : rep.levels) row.values.push_back(l.gradient_integrals[i]);
      for (std::size_t k = 0; k + 1 < row.values.size(); ++k) row.growth.push_back(row.values[k + 1] / row.values[k]);
      t.solved.push_back(std::move(row));
    }
  }

  const auto& rows = t.solved.empty() ? t.competitor : t.solved;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].growth.empty() && rows[i].growth.back() > 1.05) {
      t.onset_high = rows[i].p;
      t.onset_low = i > 0 ? rows[i - 1].p : rows[i].p;
      break;
    }
  }
  return t;
}

std::vector<ApproximationRow> approximation_convergence(const GridFunction& w, const GridFunction& psi,
                                                        const std::vector<double>& eps_list,
                                                        const IntegrandSpec& spec, const CoefficientField& a,
                                                        double theta_exp) {
  if (w.size() != psi.size()) throw InvalidConfig("w and psi live on different grids");
  for (std::size_t k = 0; k < w.size(); ++k)
    if (w[k] < psi[k]) throw InvalidConfig("w must lie above the obstacle");
  const GridPtr grid = w.grid_ptr();
  const int n = grid->dim();
  std::vector<double> coef(grid->num_cells());
  for (std::size_t c = 0; c < coef.size(); ++c) {
    const Vector x = grid->cell_center(c);
    coef[c] = a({x.data(), static_cast<std::size_t>(n)});
  }
  const double bound = 4.0 * std::max(w.max_abs(), psi.max_abs());

  std::vector<ApproximationRow> rows;
  for (double eps : eps_list) {
    const double cap = std::pow(eps, -theta_exp);
    GridFunction diff = w;
    for (std::size_t k = 0; k < w.size(); ++k)
      diff[k] = std::clamp(w[k], -cap, cap) - std::clamp(psi[k], -cap, cap);
    const GridFunction smooth = mollify(diff, eps);
    GridFunction wt = psi;
    for (std::size_t k = 0; k < w.size(); ++k) wt[k] = psi[k] + smooth[k];

    ApproximationRow row;
    row.eps = eps;
    row.bound = bound;
    row.sup_norm = wt.max_abs();
    row.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < w.size(); ++k) row.min_margin = std::min(row.min_margin, wt[k] - psi[k]);
    GridFunction e = wt;
    for (std::size_t k = 0; k < w.size(); ++k) e[k] = wt[k] - w[k];
    const CellVectorField de = gradient(e);
    const CellField dens = map_cells(grid, [&](std::size_t c) {
      return eval_modular_G(spec, {coef[c], 1.0}, de.at(c));
    });
    row.modular = integrate(dens);
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::ostringstream csv_stream() {
  std::ostringstream os;
  os.precision(17);
  return os;
}

}  // namespace

std::string to_csv(const SweepReport& report) {
  auto os = csv_stream();
  os << "cell,q,alpha,mu,s,fractal,data_scale,nodes,max_grad,energy,iterations,converged,ratio";
  std::size_t probes = 0;
  for (const auto& c : report.cells)
    for (const auto& l : c.levels) probes = std::max(probes, l.gradient_integrals.size());
  for (std::size_t i = 0; i < probes; ++i) os << ",grad_int_" << i;
  os << ",flagged\n";
  for (const auto& c : report.cells) {
    for (std::size_t k = 0; k < c.levels.size(); ++k) {
      const SweepLevel& l = c.levels[k];
      os << c.cell.label << ',' << c.cell.q << ',' << c.cell.alpha << ',' << c.cell.mu << ',' << c.cell.s << ','
         << (c.cell.fractal ? 1 : 0) << ',' << c.cell.data_scale << ',' << l.nodes << ',' << l.max_grad << ','
         << l.energy << ',' << l.iterations << ',' << (l.converged ? 1 : 0) << ',';
      if (k > 0) os << c.ratios[k - 1];
      for (std::size_t i = 0; i < probes; ++i) {
        os << ',';
        if (i < l.gradient_integrals.size()) os << l.gradient_integrals[i];
      }
      os << ',' << (c.flagged ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

std::string to_csv(const BlowupTable& table) {
  auto os = csv_stream();
  os << "source,p,index,level,value,growth\n";
  auto emit = [&](const char* src, const std::vector<BlowupRow>& rows) {
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.values.size(); ++i) {
        os << src << ',' << r.p << ',' << i << ',';
        if (std::string(src) == "competitor") os << table.levels[i];
        os << ',' << r.values[i] << ',';
        if (i > 0) os << r.growth[i - 1];
        os << '\n';
      }
    }
  };
  emit("competitor", table.competitor);
  emit("solved", table.solved);
  return os.str();
}

std::string to_csv(const std::vector<ApproximationRow>& rows) {
  auto os = csv_stream();
  os << "eps,min_margin,sup_norm,bound,modular\n";
  for (const auto& r : rows)
    os << r.eps << ',' << r.min_margin << ',' << r.sup_norm << ',' << r.bound << ',' << r.modular << '\n';
  return os.str();
}

std::string to_csv(const std::vector<FamilyEntry>& rows) {
  auto os = csv_stream();
  os << "eps,delta,sigma,energy,iterations,converged\n";
  for (const auto& r : rows)
    os << r.eps << ',' << r.delta << ',' << r.sigma << ',' << r.energy << ',' << r.iterations << ','
       << (r.converged ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace dplab
