#include "dplab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "dplab/errors.hpp"
#include "dplab/numerics.hpp"

namespace dplab {

namespace {

constexpr double kDeltaFloor = 1e-6;
constexpr std::size_t kBlock = 2048;

}  // namespace

void ObstacleProblem::validate() const {
  if (!grid) throw InvalidConfig("problem has no grid");
  integrand.validate();
  if (!integrand.solver_admissible()) throw InvalidConfig("integrand is not admissible for the solver path");
  if (a_star < 0.0 || a_star > 1.0) throw InvalidConfig("a_star must lie in [0,1]");
  if (boundary.size() != grid->num_nodes()) throw InvalidConfig("boundary datum does not match the grid");
  if (obstacle) {
    if (obstacle->size() != grid->num_nodes()) throw InvalidConfig("obstacle does not match the grid");
    for (std::size_t k = 0; k < grid->num_nodes(); ++k)
      if (grid->is_boundary(k) && boundary[k] < (*obstacle)[k] - 1e-12)
        throw Infeasible("boundary datum lies below the obstacle");
  }
}

std::vector<double> ObstacleProblem::cell_coefficients() const {
  std::vector<double> out(grid->num_cells());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const Vector x = grid->cell_center(c);
    const double v = a({x.data(), static_cast<std::size_t>(x.size())});
    if (!(v >= 0.0)) throw InvalidConfig("coefficient a must be nonnegative");
    out[c] = v + a_star;
  }
  return out;
}

RegularizationSchedule RegularizationSchedule::geometric(double eps0, double eps_min, double delta0,
                                                         double delta_min) {
  RegularizationSchedule s;
  double e = eps0, d = delta0;
  while (e >= eps_min * (1.0 - 1e-12)) {
    s.eps.push_back(e);
    s.delta.push_back(std::max(d, delta_min));
    e *= 0.5;
    d *= 0.5;
  }
  return s;
}

void RegularizationSchedule::validate() const {
  if (eps.empty()) throw InvalidConfig("schedule is empty");
  for (double e : eps)
    if (!(e > 0.0)) throw InvalidConfig("schedule eps must be positive");
  for (double d : delta)
    if (!(d >= 0.0)) throw InvalidConfig("schedule delta must be nonnegative");
}

double RegularizationSchedule::delta_at(std::size_t k) const {
  if (delta.empty()) return kDeltaFloor;
  return std::max(kDeltaFloor, delta[std::min(k, delta.size() - 1)]);
}

double sigma_eps(double eps, double du0_q_norm_q) { return 1.0 / (1.0 + 1.0 / eps + du0_q_norm_q / eps); }

DiscreteEnergy::DiscreteEnergy(const ObstacleProblem& problem, IntegrandSpec spec, double coefficient_shift)
    : grid_(problem.grid), spec_(spec) {
  coef_ = problem.cell_coefficients();
  for (double& c : coef_) c += coefficient_shift;
  const Grid& g = *grid_;
  const int n = g.dim();
  const std::size_t nc = g.num_cells();
  volume_.resize(nc);
  corners_.resize(nc << n);
  inv_spacing_.resize(nc * n);
  int idx[3];
  for (std::size_t c = 0; c < nc; ++c) {
    volume_[c] = g.cell_volume(c);
    g.cell_corners(c, {corners_.data() + (c << n), static_cast<std::size_t>(1 << n)});
    g.cell_multi(c, {idx, static_cast<std::size_t>(n)});
    for (int a = 0; a < n; ++a) inv_spacing_[c * n + a] = 1.0 / g.spacing(a, idx[a]);
  }
}

double DiscreteEnergy::value(const GridFunction& w, Execution ex) const {
  const int n = grid_->dim();
  const int nk = 1 << n;
  const double scale = 1.0 / (1 << (n - 1));
  const std::size_t nc = volume_.size();
  const auto nb = static_cast<std::ptrdiff_t>((nc + kBlock - 1) / kBlock);
  std::vector<double> partial(nb);
  auto block = [&](std::ptrdiff_t b) {
    KahanSum s;
    const std::size_t end = std::min(nc, (b + 1) * kBlock);
    for (std::size_t c = b * kBlock; c < end; ++c) {
      const std::size_t* cn = corners_.data() + (c << n);
      double t2 = 0.0;
      for (int a = 0; a < n; ++a) {
        double d = 0.0;
        for (int k = 0; k < nk; ++k) d += (k & (1 << a) ? w[cn[k]] : -w[cn[k]]);
        d *= scale * inv_spacing_[c * n + a];
        t2 += d * d;
      }
      s += volume_[c] * profile_H(spec_, coef_[c], std::sqrt(t2)).v;
    }
    partial[b] = s.value();
  };
  if (ex == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < nb; ++b) block(b);
  } else {
    for (std::ptrdiff_t b = 0; b < nb; ++b) block(b);
  }
  KahanSum total;
  for (double v : partial) total += v;
  return total.value();
}

double DiscreteEnergy::value_and_gradient(const GridFunction& w, std::span<double> grad, Execution ex) const {
  const Grid& g = *grid_;
  const int n = g.dim();
  const int nk = 1 << n;
  const double scale = 1.0 / (1 << (n - 1));
  const std::size_t nc = volume_.size();

  // per-cell energy and derivative with respect to each corner value
  auto cell_kernel = [&](std::size_t c, double* dcorner) {
    const std::size_t* cn = corners_.data() + (c << n);
    double gv[3];
    double t2 = 0.0;
    for (int a = 0; a < n; ++a) {
      double d = 0.0;
      for (int k = 0; k < nk; ++k) d += (k & (1 << a) ? w[cn[k]] : -w[cn[k]]);
      gv[a] = d * scale * inv_spacing_[c * n + a];
      t2 += gv[a] * gv[a];
    }
    const double t = std::sqrt(t2);
    const Jet j = profile_H(spec_, coef_[c], t);
    const double f = t > 0.0 ? volume_[c] * j.d1 / t : 0.0;
    for (int k = 0; k < nk; ++k) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) s += (k & (1 << a) ? 1.0 : -1.0) * gv[a] * scale * inv_spacing_[c * n + a];
      dcorner[k] = f * s;
    }
    return volume_[c] * j.v;
  };

  std::fill(grad.begin(), grad.end(), 0.0);
  if (ex == Execution::serial) {
    KahanSum total;
    double dc[8];
    for (std::size_t c = 0; c < nc; ++c) {
      total += cell_kernel(c, dc);
      const std::size_t* cn = corners_.data() + (c << n);
      for (int k = 0; k < nk; ++k) grad[cn[k]] += dc[k];
    }
    return total.value();
  }

  std::vector<double> dcell(nc << n);
  const auto nb = static_cast<std::ptrdiff_t>((nc + kBlock - 1) / kBlock);
  std::vector<double> partial(nb);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    KahanSum s;
    const std::size_t end = std::min(nc, (b + 1) * kBlock);
    for (std::size_t c = b * kBlock; c < end; ++c) s += cell_kernel(c, dcell.data() + (c << n));
    partial[b] = s.value();
  }
  // gather in fixed cell order per node
  const auto nn = static_cast<std::ptrdiff_t>(g.num_nodes());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < nn; ++k) {
    int idx[3], cidx[3];
    g.node_multi(k, {idx, static_cast<std::size_t>(n)});
    double s = 0.0;
    for (int corner = nk - 1; corner >= 0; --corner) {
      bool ok = true;
      for (int a = 0; a < n; ++a) {
        cidx[a] = idx[a] - ((corner >> a) & 1);
        if (cidx[a] < 0 || cidx[a] >= g.cells(a)) ok = false;
      }
      if (!ok) continue;
      const std::size_t c = g.cell_index({cidx, static_cast<std::size_t>(n)});
      s += dcell[(c << n) + corner];
    }
    grad[k] = s;
  }
  KahanSum total;
  for (double v : partial) total += v;
  return total.value();
}

EnergyBreakdown DiscreteEnergy::breakdown(const GridFunction& w) const {
  const CellVectorField gr = gradient(w, Execution::serial);
  KahanSum lp, qp;
  for (std::size_t c = 0; c < volume_.size(); ++c) {
    const double t = gr.norm_at(c);
    const double l = profile_F(spec_, t).v;
    lp += volume_[c] * l;
    qp += volume_[c] * (profile_H(spec_, coef_[c], t).v - l);
  }
  return {lp.value() + qp.value(), lp.value(), qp.value()};
}

double projected_gradient_norm(const ObstacleProblem& problem, const GridFunction& w, std::span<const double> grad) {
  const Grid& g = *problem.grid;
  double s = 0.0;
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    if (g.is_boundary(k)) continue;
    double gk = grad[k];
    if (problem.obstacle && w[k] <= (*problem.obstacle)[k] + 1e-14 && gk > 0.0) gk = 0.0;
    s += gk * gk;
  }
  return std::sqrt(s);
}

double max_gradient_in(const GridFunction& w, const Box& box) {
  const CellVectorField gr = gradient(w);
  const Grid& g = w.grid();
  double m = 0.0;
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    const Vector x = g.cell_center(c);
    if (box.contains({x.data(), static_cast<std::size_t>(x.size())})) m = std::max(m, gr.norm_at(c));
  }
  return m;
}

SolveResult minimize(const ObstacleProblem& problem, const IntegrandSpec& spec, double coefficient_shift,
                     const SolverOptions& opt, const GridFunction* initial) {
  problem.validate();
  const DiscreteEnergy E(problem, spec, coefficient_shift);
  const Grid& g = *problem.grid;
  const std::size_t N = g.num_nodes();
  std::vector<char> is_free(N);
  for (std::size_t k = 0; k < N; ++k) is_free[k] = !g.is_boundary(k);
  const GridFunction* psi = problem.obstacle ? &*problem.obstacle : nullptr;

  auto project = [&](GridFunction& v) {
    for (std::size_t k = 0; k < N; ++k) {
      if (!is_free[k])
        v[k] = problem.boundary[k];
      else if (psi)
        v[k] = std::max(v[k], (*psi)[k]);
    }
  };

  GridFunction x = initial ? *initial : problem.boundary;
  project(x);
  GridFunction y = x, xn = x;
  std::vector<double> gy(N), gx(N);
  double Ex = E.value_and_gradient(x, gx, opt.execution);
  double Ey = Ex;
  gy = gx;
  bool y_is_x = true;
  double theta = 1.0;
  double t = 1.0;

  SolveReport rep;
  rep.energy_history.push_back(Ex);
  int it = 0;
  for (it = 1; it <= opt.max_iter; ++it) {
    if (!y_is_x) Ey = E.value_and_gradient(y, gy, opt.execution);
    for (std::size_t k = 0; k < N; ++k)
      if (!is_free[k]) gy[k] = 0.0;

    double En = 0.0;
    while (true) {
      double lin = 0.0, quad = 0.0;
      for (std::size_t k = 0; k < N; ++k) xn[k] = y[k] - t * gy[k];
      project(xn);
      for (std::size_t k = 0; k < N; ++k) {
        const double d = xn[k] - y[k];
        lin += gy[k] * d;
        quad += d * d;
      }
      En = E.value(xn, opt.execution);
      if (En <= Ey + lin + quad / (2.0 * t) + 1e-15 * std::abs(Ey) || t < 1e-300) break;
      t *= 0.5;
    }

    if (En > Ex) {
      if (y_is_x) break;  // no further decrease representable
      theta = 1.0;
      y = x;
      Ey = E.value_and_gradient(x, gy, opt.execution);
      gx = gy;
      y_is_x = true;
      continue;
    }

    double restart_dot = 0.0;
    for (std::size_t k = 0; k < N; ++k) restart_dot += gy[k] * (xn[k] - x[k]);
    const double theta_n = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double beta = restart_dot > 0.0 ? 0.0 : (theta - 1.0) / theta_n;
    for (std::size_t k = 0; k < N; ++k) y[k] = xn[k] + beta * (xn[k] - x[k]);
    std::swap(x, xn);
    Ex = En;
    theta = restart_dot > 0.0 ? 1.0 : theta_n;
    y_is_x = beta == 0.0;
    if (y_is_x) {
      Ey = E.value_and_gradient(x, gx, opt.execution);
      gy = gx;
    }
    t *= 1.1;
    rep.energy_history.push_back(Ex);

    const auto h = rep.energy_history.size();
    if (h > static_cast<std::size_t>(opt.window)) {
      const double drop = rep.energy_history[h - 1 - opt.window] - Ex;
      if (drop <= opt.rel_decrease * std::max(std::abs(Ex), 1e-300)) {
        E.value_and_gradient(x, gx, opt.execution);
        if (projected_gradient_norm(problem, x, gx) < opt.pg_tol * (1.0 + std::abs(Ex))) {
          rep.converged = true;
          break;
        }
      }
    }
  }

  // Energy decrease has hit rounding level: finish with plain projected
  // gradient steps, judged by the projected gradient alone.
  if (!rep.converged) {
    E.value_and_gradient(x, gx, opt.execution);
    double pg = projected_gradient_norm(problem, x, gx);
    double step = 0.5 * t;
    for (; it <= opt.max_iter && pg >= opt.pg_tol * (1.0 + std::abs(Ex)); ++it) {
      for (std::size_t k = 0; k < N; ++k) xn[k] = x[k] - step * (is_free[k] ? gx[k] : 0.0);
      project(xn);
      std::vector<double> gn(N);
      const double En = E.value_and_gradient(xn, gn, opt.execution);
      const double pn = projected_gradient_norm(problem, xn, gn);
      if (En > Ex + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(Ex) || pn > pg) {
        step *= 0.5;
        if (step < 1e-300) break;
        continue;
      }
      std::swap(x, xn);
      gx.swap(gn);
      pg = pn;
      Ex = std::min(Ex, En);
    }
    rep.converged = pg < opt.pg_tol * (1.0 + std::abs(Ex));
  }

  rep.iterations = std::min(it, opt.max_iter);
  rep.energy = E.value_and_gradient(x, gx, opt.execution);
  rep.pg_norm = projected_gradient_norm(problem, x, gx);
  if (!rep.converged) rep.converged = rep.pg_norm < opt.pg_tol * (1.0 + std::abs(rep.energy));
  rep.max_grad_interior = max_gradient_in(x, Box::cube(g.dim(), 0.5));
  double bound = 1.0;
  for (std::size_t k = 0; k < N; ++k)
    if (!is_free[k]) bound = std::max(bound, std::abs(problem.boundary[k]));
  if (psi) bound = std::max(bound, psi->max_abs());
  rep.max_principle_margin = bound - x.max_abs();
  rep.feasibility_margin = std::numeric_limits<double>::max();
  if (psi)
    for (std::size_t k = 0; k < N; ++k) rep.feasibility_margin = std::min(rep.feasibility_margin, x[k] - (*psi)[k]);
  return {std::move(x), std::move(rep)};
}

namespace {

double du0_norm_q(const ObstacleProblem& problem) {
  const CellVectorField gr = gradient(problem.boundary);
  const double q = problem.integrand.q;
  return integrate(map_cells(problem.grid, [&](std::size_t c) { return std::pow(gr.norm_at(c), q); }));
}

}  // namespace

std::vector<FamilyEntry> regularized_family(const ObstacleProblem& problem, const RegularizationSchedule& schedule,
                                            GridFunction* final_solution) {
  schedule.validate();
  problem.validate();
  const double nq = du0_norm_q(problem);
  std::vector<FamilyEntry> out;
  std::optional<GridFunction> warm;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    IntegrandSpec spec = problem.integrand;
    spec.delta_moll = schedule.delta_at(k);
    const double sigma = sigma_eps(schedule.eps[k], nq);
    SolveResult r = minimize(problem, spec, sigma, schedule.options, warm ? &*warm : nullptr);
    out.push_back({schedule.eps[k], spec.delta_moll, sigma, r.report.energy, r.report.iterations,
                   r.report.converged});
    warm = std::move(r.u);
  }
  if (final_solution && warm) *final_solution = std::move(*warm);
  return out;
}

SolveResult solve(const ObstacleProblem& problem, const RegularizationSchedule& schedule) {
  schedule.validate();
  problem.validate();
  const double nq = du0_norm_q(problem);
  std::optional<SolveResult> last;
  int total = 0;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    IntegrandSpec spec = problem.integrand;
    spec.delta_moll = schedule.delta_at(k);
    SolveResult r = minimize(problem, spec, sigma_eps(schedule.eps[k], nq), schedule.options,
                             last ? &last->u : nullptr);
    total += r.report.iterations;
    last = std::move(r);
  }
  last->report.iterations = total;
  return std::move(*last);
}

EnergyBreakdown energy(const ObstacleProblem& problem, const GridFunction& w) {
  const DiscreteEnergy E(problem, problem.integrand, 0.0);
  return E.breakdown(w);
}

std::string to_json(const SolveReport& r) {
  nlohmann::json j;
  j["energy"] = r.energy;
  j["iterations"] = r.iterations;
  j["projected_gradient_norm"] = r.pg_norm;
  j["max_grad_interior"] = r.max_grad_interior;
  j["max_principle_margin"] = r.max_principle_margin;
  j["feasibility_margin"] = r.feasibility_margin;
  j["converged"] = r.converged;
  return j.dump(2);
}

}  // namespace dplab
