#include "dplab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dplab/errors.hpp"
#include "dplab/fractal.hpp"
#include "dplab/grid.hpp"
#include "dplab/integrand.hpp"
#include "dplab/solver.hpp"

namespace dplab {

namespace {

struct Tally {
  CheckResult r;
  double slack;
  // records lhs <= rhs with relative slack
  void le(double lhs, double rhs) {
    ++r.samples;
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    const double excess = (lhs - rhs) / scale;
    r.worst = r.samples == 1 ? excess : std::max(r.worst, excess);
    if (excess > slack) ++r.violations;
  }
};

std::vector<IntegrandSpec> family() {
  std::vector<IntegrandSpec> out;
  IntegrandSpec s;
  s.growth = GrowthFunction::logarithmic();
  s.mu = 1.0;
  out.push_back(s);
  for (int level = 1; level <= 3; ++level) {
    s.growth = GrowthFunction::iterated_log(level);
    s.mu = 1.2;
    out.push_back(s);
  }
  return out;
}

std::array<double, 2> random_vector(std::mt19937_64& rng, double log10_lo, double log10_hi) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::acos(-1.0)), mag(log10_lo, log10_hi);
  const double r = std::pow(10.0, mag(rng)), th = ang(rng);
  return {r * std::cos(th), r * std::sin(th)};
}

}  // namespace

double v_comparability_constant(double p) { return std::pow(2.0, 0.5 * std::abs(p - 2.0)) * std::max(1.0, 2.0 / p); }

std::vector<CheckResult> ellipticity_suite(std::uint64_t seed, int samples, double slack) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CheckResult> out;
  const auto specs = family();
  std::vector<double> lambdas;
  for (const auto& s : specs) lambdas.push_back(smallest_lambda(s).admissible());

  Tally sandwich{{"L sandwich"}, slack}, eig{{"Hessian eigenvalue bounds"}, slack};
  for (int k = 0; k < samples; ++k) {
    const std::size_t i = k % specs.size();
    const IntegrandSpec& s = specs[i];
    const double L = lambdas[i];
    const auto z = random_vector(rng, -5.5, 7.5);
    const double t = std::hypot(z[0], z[1]);
    const double tg = t * s.growth(t);
    const double v = eval_L(s, z);
    sandwich.le(tg / L, v);
    sandwich.le(v, L * tg + L);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(hess_L(s, z));
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().cwiseAbs().maxCoeff();
    eig.le(1.0 / (L * std::pow(1.0 + t * t, 0.5 * s.mu)), lo);
    eig.le(hi, L * (s.growth(t) + 1.0) / std::sqrt(1.0 + t * t));
  }
  out.push_back(sandwich.r);
  out.push_back(eig.r);

  Tally fy{{"Fenchel-Young"}, slack};
  for (int k = 0; k < samples; ++k) {
    IntegrandSpec s = specs[k % specs.size()];
    s.q = 1.05 + 0.9 * unit(rng);
    s.s = unit(rng);
    const double a = 0.01 + unit(rng);
    const auto z = random_vector(rng, -3.0, 3.0);
    const auto w = random_vector(rng, -3.0, 3.0);
    const double h = eval_H(s, {a, 1.0}, z);
    const double hs = conjugate_H(s, {a, 1.0}, w);
    fy.le(z[0] * w[0] + z[1] * w[1], h + hs);
  }
  out.push_back(fy.r);

  Tally vc{{"V_sp comparability"}, slack};
  for (int k = 0; k < samples; ++k) {
    const double p = 1.1 + 2.9 * unit(rng);
    const double s = unit(rng);
    const auto z1 = random_vector(rng, -3.0, 3.0);
    auto z2 = random_vector(rng, -3.0, 3.0);
    if (k % 4 == 0) z2 = {-z1[0] * unit(rng), -z1[1] * unit(rng)};
    const Vector d = V_sp(s, p, z1) - V_sp(s, p, z2);
    const double diff = std::hypot(z1[0] - z2[0], z1[1] - z2[1]);
    const double ref =
        std::pow(s * s + z1[0] * z1[0] + z1[1] * z1[1] + z2[0] * z2[0] + z2[1] * z2[1], 0.25 * (p - 2.0)) * diff;
    const double C = v_comparability_constant(p);
    vc.le(ref / C, d.norm());
    vc.le(d.norm(), C * ref);
  }
  out.push_back(vc.r);

  Tally mon{{"monotonicity of t|t|^(p-1)"}, slack};
  for (int k = 0; k < samples; ++k) {
    const double p = 1.0 + 2.0 * unit(rng);
    const double t1 = std::pow(10.0, -3.0 + 6.0 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
    const double t2 = k % 5 == 0 ? -t1 : std::pow(10.0, -3.0 + 6.0 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
    auto f = [p](double t) { return std::pow(std::abs(t), p - 1.0) * t; };
    mon.le(std::pow(2.0, 1.0 - p) * std::pow(std::abs(t1 - t2), p), std::abs(f(t1) - f(t2)));
  }
  out.push_back(mon.r);
  return out;
}

std::vector<CheckResult> structural_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Cantor intervals: count 2^J, equal lengths lambda^J, disjoint and ordered
  {
    CheckResult r{"Cantor interval invariants"};
    for (double eps : {0.15, 0.5}) {
      const CantorApprox c({2, eps, 10});
      const auto iv = c.intervals();
      ++r.samples;
      bool ok = iv.size() == 1024u;
      for (std::size_t i = 0; i < iv.size(); ++i) {
        ok = ok && std::abs(iv[i].length() - std::pow(c.lambda(), 10)) <= 1e-15;
        if (i > 0) ok = ok && iv[i].lo > iv[i - 1].hi;
      }
      if (!ok) ++r.violations;
    }
    out.push_back(r);
  }

  // Grid binary round trip is exact
  {
    CheckResult r{"grid binary round trip"};
    auto g = std::make_shared<const Grid>(2, 9, Grading{0.5, 2});
    GridFunction w(g, [&](std::span<const double> x) { return std::sin(3 * x[0]) + x[1] * unit(rng); });
    std::stringstream ss;
    write_binary(ss, w);
    const GridFunction back = read_binary(ss);
    ++r.samples;
    if (back.size() != w.size() || !std::equal(w.values().begin(), w.values().end(), back.values().begin()))
      ++r.violations;
    out.push_back(r);
  }

  // Small obstacle solve respects the constraint and the maximum principle
  {
    CheckResult r{"obstacle feasibility and max principle"};
    auto g = std::make_shared<const Grid>(2, 9);
    for (int trial = 0; trial < 3; ++trial) {
      ObstacleProblem p;
      p.grid = g;
      p.integrand.q = 1.4;
      p.alpha = 0.5;
      const double c0 = unit(rng), c1 = unit(rng);
      p.a = [](std::span<const double> x) { return std::sqrt(std::abs(x[1])); };
      p.boundary = GridFunction(g, [&](std::span<const double> x) { return c0 * x[0] - c1 * x[1]; });
      const double level = -0.5 * unit(rng);
      p.obstacle = GridFunction(g, [&](std::span<const double> x) { return level - x[0] * x[0]; });
      for (std::size_t k = 0; k < g->num_nodes(); ++k)
        if (g->is_boundary(k)) (*p.obstacle)[k] = std::min((*p.obstacle)[k], p.boundary[k]);
      IntegrandSpec spec = p.integrand;
      spec.delta_moll = 1e-3;
      SolverOptions so;
      so.execution = Execution::serial;
      const SolveResult res = minimize(p, spec, 0.0, so);
      ++r.samples;
      if (res.report.feasibility_margin < 0.0 || res.report.max_principle_margin < -1e-8) ++r.violations;
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace dplab
