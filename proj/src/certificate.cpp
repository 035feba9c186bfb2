#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "dplab/errors.hpp"
#include "dplab/experiments.hpp"
#include "dplab/numerics.hpp"

namespace dplab {

namespace {

constexpr double kPsiMax = 0.25 * 1.5 * 4.1231056256176606;  // |D u_*| <= kPsiMax / |x_n|
constexpr double kThetaMax = 6.0 * 1.1180339887498949;      // max theta'(r) sqrt(1 + r^2)

// |D u_*| * |x_n| as a function of r = dist / |x_n|
double psi_star(double r) {
  if (r <= 2.0 || r >= 4.0) return 0.0;
  const double u = 0.5 * (r - 2.0);
  return 0.25 * 6.0 * u * (1.0 - u) * std::sqrt(1.0 + r * r);
}

double chi_a(double r) { return 1.0 - smoothstep((r - 0.5) / 1.5).first; }

struct GapLevel {
  double size;
  double count;
};

// Gap structure of the depth-J set inside [-1/2,1/2] plus the two outer
// strips, folded into one gap of size 2 * outer.
std::vector<GapLevel> gap_levels(const CantorApprox& c, double outer) {
  std::vector<GapLevel> g;
  for (int i = 1; i <= c.depth(); ++i) g.push_back({c.gap(i), std::ldexp(1.0, i - 1)});
  g.push_back({2.0 * outer, 1.0});
  return g;
}

// Panels of [a, b] graded geometrically toward both ends.
template <class P>
void graded_panels(double a, double b, P&& panel) {
  if (!(b > a)) return;
  double lo = a, hi = b;
  double step = 0.25 * (b - a);
  for (int k = 0; k < 6; ++k) {
    panel(lo, lo + step * 0.5);
    panel(lo + step * 0.5, lo + step);
    panel(hi - step, hi - step * 0.5);
    panel(hi - step * 0.5, hi);
    lo += step;
    hi -= step;
    step *= 0.5;
  }
  panel(lo, hi);
}

template <class F>
double graded_gauss(const GaussRule& rule, double a, double b, F&& f) {
  double s = 0.0;
  graded_panels(a, b, [&](double lo, double hi) { s += integrate_gauss(rule, lo, hi, f); });
  return s;
}

// Sum over dyadic levels of Gauss panels; h-breakpoints split panels.
struct HIntegrator {
  std::vector<double> nodes, weights;

  HIntegrator(double h_lo, double h_hi, std::vector<double> breaks, int panels_per_level, int order) {
    std::vector<double> edges{h_lo, h_hi};
    for (double h = h_hi; h > h_lo; h *= 0.5) {
      const double lo = std::max(h_lo, 0.5 * h);
      for (int p = 0; p <= panels_per_level; ++p) edges.push_back(lo + (h - lo) * p / panels_per_level);
    }
    for (double b : breaks)
      if (b > h_lo && b < h_hi) edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](double x, double y) { return std::abs(x - y) <= 1e-15 * std::max(x, y); }),
                edges.end());
    const GaussRule rule = gauss_legendre(order);
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const double a = edges[e], b = edges[e + 1];
      const double hw = 0.5 * (b - a), c = 0.5 * (a + b);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        nodes.push_back(c + hw * rule.nodes[i]);
        weights.push_back(hw * rule.weights[i]);
      }
    }
  }

  template <class F>
  double run(F&& f) const {
    const auto m = static_cast<std::ptrdiff_t>(nodes.size());
    std::vector<double> vals(m);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < m; ++i) vals[i] = f(nodes[i]);
    KahanSum s;
    for (std::ptrdiff_t i = 0; i < m; ++i) s += weights[i] * vals[i];
    return s.value();
  }
};

// Semi-analytic x-bar integral of F(r) with F supported in [r_lo, r_hi].
template <class F>
double xbar_integral(const std::vector<GapLevel>& gaps, double set_measure, double h, double r_lo, double r_hi,
                     const GaussRule& rule, F&& f) {
  double full = std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (const GapLevel& g : gaps) {
    const double R = g.size / (2.0 * h);
    const double up = std::min(R, r_hi);
    if (up <= r_lo) continue;
    double part;
    if (up == r_hi) {
      if (std::isnan(full)) full = graded_gauss(rule, r_lo, r_hi, f);
      part = full;
    } else {
      part = graded_gauss(rule, r_lo, up, f);
    }
    s += g.count * 2.0 * h * part;
  }
  if (r_lo <= 0.0 && set_measure > 0.0) s += set_measure * f(0.0);
  return s;
}

double set_measure(const CantorApprox& c) { return std::ldexp(1.0, c.depth()) * c.length(c.depth()); }

std::vector<double> radial_breaks(const std::vector<GapLevel>& gaps, std::initializer_list<double> radii) {
  std::vector<double> b;
  for (const GapLevel& g : gaps)
    for (double r : radii) b.push_back(g.size / (2.0 * r));
  return b;
}

// Gaps of the limit set that matter for radii >= r_lo at heights >= h_min.
std::vector<GapLevel> limit_gap_levels(const CantorApprox& c, double outer, double h_min, double r_lo) {
  std::vector<GapLevel> g;
  const double lam = c.lambda();
  double size = 1.0 - 2.0 * lam;
  for (int i = 1; size > 2.0 * r_lo * h_min; ++i, size *= lam) g.push_back({size, std::ldexp(1.0, i - 1)});
  g.push_back({2.0 * outer, 1.0});
  return g;
}

// Integral over 0 < |x_n| < h0 (both signs) of the x-bar integral of f(r, h),
// f supported in r in [r_lo, r_hi].  For h0 <= g_1 / (2 r_hi) the layer is
// self-similar: h -> lambda h maps the x-bar integral at scale h to 2 lambda
// times the one at scale h, so the layer is a series over copies of the band
// [lambda h0, h0].  The series is cut once terms are negligible and the rest is
// bounded by `remainder(h)`, an upper bound for the layer below h.
class SelfSimilarTail {
 public:
  SelfSimilarTail(const CantorApprox& c, double h0, double r_lo, double r_hi, int panels, int order)
      : lambda_(c.lambda()) {
    if (h0 > (1.0 - 2.0 * lambda_) / (2.0 * r_hi))
      throw InvalidConfig("grading too coarse for the self-similar layer");
    const auto gaps = limit_gap_levels(c, 0.5, lambda_ * h0, r_lo);
    const HIntegrator band(lambda_ * h0, h0, radial_breaks(gaps, {r_lo, r_hi}), panels, order);
    const GaussRule rule = gauss_legendre(order + 2);
    for (std::size_t i = 0; i < band.nodes.size(); ++i) {
      const double h = band.nodes[i];
      std::vector<double> edges{r_lo, r_hi};
      for (const GapLevel& g : gaps) {
        const double R = g.size / (2.0 * h);
        if (R > r_lo && R < r_hi) edges.push_back(R);
      }
      std::sort(edges.begin(), edges.end());
      for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        const double mid = 0.5 * (edges[e] + edges[e + 1]);
        double density = 0.0;
        for (const GapLevel& g : gaps)
          if (g.size / (2.0 * h) > mid) density += g.count * 2.0 * h;
        graded_panels(edges[e], edges[e + 1], [&](double lo, double hi) {
          const double hw = 0.5 * (hi - lo), c0 = 0.5 * (lo + hi);
          for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            h_.push_back(h);
            r_.push_back(c0 + hw * rule.nodes[j]);
            w_.push_back(2.0 * band.weights[i] * density * hw * rule.weights[j]);
          }
        });
      }
    }
  }

  template <class F, class R>
  double run(F&& f, R&& remainder) const {
    const double ratio = 2.0 * lambda_ * lambda_;
    KahanSum total;
    double scale = 1.0, factor = 1.0;
    for (int k = 0; k < 4000; ++k) {
      KahanSum term;
      for (std::size_t i = 0; i < w_.size(); ++i) term += w_[i] * f(r_[i], scale * h_[i]);
      const double t = factor * term.value();
      total += t;
      scale *= lambda_;
      factor *= ratio;
      if (k >= 8 && std::abs(t) <= 1e-13 * std::abs(total.value())) break;
    }
    return total.value() + remainder(scale * h_max());
  }

 private:
  double h_max() const { return h_.empty() ? 0.0 : *std::max_element(h_.begin(), h_.end()); }
  double lambda_;
  std::vector<double> h_, r_, w_;
};

// Measure constant: |{dist(., C) <= rho}| <= K_M rho^eps for rho <= 1/2 (true set).
double measure_constant(const CantorApprox& c) {
  const double eps = c.params().eps;
  return 4.0 * std::pow(2.0 * c.lambda(), eps - 1.0);
}

// sup_t { r t - H(t) } by safeguarded Newton on the monotone H'(t) = r.
double fast_conjugate(const IntegrandSpec& spec, double a, double r) {
  const Jet j0 = profile_H(spec, a, 0.0);
  if (r <= 0.0 || j0.d1 >= r) return -j0.v;
  double lo = 0.0;
  double t = a > 0.0 ? std::pow(r / (spec.q * a), 1.0 / (spec.q - 1.0)) : 1.0;
  double hi = std::max(t, 1e-300);
  while (profile_H(spec, a, hi).d1 < r) hi *= 2.0;
  t = std::min(t, hi);
  for (int it = 0; it < 200; ++it) {
    const Jet j = profile_H(spec, a, t);
    const double res = j.d1 - r;
    if (res > 0.0) hi = t; else lo = t;
    double next = j.d2 > 0.0 ? t - res / j.d2 : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - t);
    t = next;
    if (step <= 1e-14 * t || hi - lo <= 1e-15 * hi) break;
  }
  return std::max(r * t - profile_H(spec, a, t).v, -j0.v);
}

IntegrandSpec certificate_spec(const CounterexampleConfig& c) {
  IntegrandSpec s = c.integrand;
  s.q = c.q;
  s.delta_moll = 0.0;
  return s;
}

}  // namespace

FractalQuadrature::FractalQuadrature(const Counterexample& ce, QuadratureOptions options) : ce_(ce), opt_(options) {
  if (ce.dim() != 2) throw InvalidConfig("fractal quadrature is implemented for n = 2");
  if (opt_.grading_levels < 2 || opt_.gauss_order < 3 || opt_.panels_per_level < 2)
    throw InvalidConfig("quadrature resolution too small");
}

double FractalQuadrature::h0() const { return std::ldexp(1.0, -opt_.grading_levels); }

double FractalQuadrature::z_bound_constant() const {
  const double lam = ce_.cantor().lambda();
  const double eps = ce_.config().cantor.eps;
  return ce_.sphere_normalisation() * ce_.config().z_scale * kThetaMax * std::pow(1.0 - 2.0 * lam, eps - 1.0);
}

namespace {

// Generic 2-D box integral of f(x1, x2) with x1-breakpoints at the atom cone
// edges.  Pieces where `active` is false at the midpoint are skipped.
template <class F>
double box_integral(const Counterexample& ce, double x1lo, double x1hi, double x2lo, double x2hi, int x2_panels,
                    int order, const std::vector<double>& x1_extra, F&& f) {
  const GaussRule rule = gauss_legendre(order);
  const auto centres = ce.measure().centers_1d();
  std::vector<double> x2n, x2w;
  for (int p = 0; p < x2_panels; ++p) {
    const double a = x2lo + (x2hi - x2lo) * p / x2_panels, b = x2lo + (x2hi - x2lo) * (p + 1) / x2_panels;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      x2n.push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i]);
      x2w.push_back(0.5 * (b - a) * rule.weights[i]);
    }
  }
  const auto m = static_cast<std::ptrdiff_t>(x2n.size());
  std::vector<double> rows(m);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    const double x2 = x2n[i];
    const double h = std::abs(x2);
    std::vector<double> edges{x1lo, x1hi};
    for (double e : x1_extra)
      if (e > x1lo && e < x1hi) edges.push_back(e);
    const auto b = std::lower_bound(centres.begin(), centres.end(), x1lo - 0.5 * h);
    const auto e = std::upper_bound(centres.begin(), centres.end(), x1hi + 0.5 * h);
    for (auto it = b; it != e; ++it) {
      for (double off : {-0.5, -0.25, 0.25, 0.5}) {
        const double v = *it + off * h;
        if (v > x1lo && v < x1hi) edges.push_back(v);
      }
    }
    std::sort(edges.begin(), edges.end());
    KahanSum s;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const double a = edges[k], c = edges[k + 1];
      if (!(c > a)) continue;
      s += integrate_gauss(rule, a, c, [&](double x1) { return f(x1, x2); });
    }
    rows[i] = s.value();
  }
  KahanSum total;
  for (std::ptrdiff_t i = 0; i < m; ++i) total += x2w[i] * rows[i];
  return total.value();
}

}  // namespace

Estimate FractalQuadrature::pairing_with(const std::function<Vector(std::span<const double>)>& grad_w,
                                         const Box& support) const {
  auto f = [&](double x1, double x2) {
    const auto [z1, z2] = ce_.dual_z_2d(x1, x2);
    if (z1 == 0.0 && z2 == 0.0) return 0.0;
    const double x[2] = {x1, x2};
    const Vector g = grad_w(x);
    return ce_.config().z_scale * (g[0] * z1 + g[1] * z2);
  };
  const int panels = 8 * opt_.panels_per_level;
  // split at x2 = 0 when the support crosses the plane
  auto run = [&](int p) {
    double s = 0.0;
    const double lo = support.lo[1], hi = support.hi[1];
    if (lo < 0.0 && hi > 0.0) {
      s += box_integral(ce_, support.lo[0], support.hi[0], lo, 0.0, p, opt_.gauss_order, {}, f);
      s += box_integral(ce_, support.lo[0], support.hi[0], 0.0, hi, p, opt_.gauss_order, {}, f);
    } else {
      s += box_integral(ce_, support.lo[0], support.hi[0], lo, hi, p, opt_.gauss_order, {}, f);
    }
    return s;
  };
  const double fine = run(panels), coarse = run(panels / 2);
  return {fine, std::abs(fine - coarse), 0.0};
}

Estimate FractalQuadrature::pairing() const {
  // D u~ pairs with z only inside the frame where D phi != 0 and |x_n| > 1/2.
  auto f = [&](double x1, double x2) {
    const auto [z1, z2] = ce_.dual_z_2d(x1, x2);
    if (z1 == 0.0 && z2 == 0.0) return 0.0;
    const double x[2] = {x1, x2};
    const Vector g = ce_.grad_u_tilde(x);
    return g[0] * z1 + g[1] * z2;
  };
  const double a = 0.75, b = 5.0 / 6.0;
  const std::vector<double> extra{-a, 0.0, a};
  auto run = [&](int p) {
    double s = 0.0;
    for (double sgn : {1.0, -1.0}) {
      const double ylo = sgn > 0 ? a : -b, yhi = sgn > 0 ? b : -a;
      s += box_integral(ce_, -b, b, ylo, yhi, p, opt_.gauss_order, extra, f);
      const double slo = sgn > 0 ? 0.5 : -a, shi = sgn > 0 ? a : -0.5;
      s += box_integral(ce_, a, b, slo, shi, 2 * p, opt_.gauss_order, {}, f);
      s += box_integral(ce_, -b, -a, slo, shi, 2 * p, opt_.gauss_order, {}, f);
    }
    return s;
  };
  const int panels = 8 * opt_.panels_per_level;
  const double fine = run(panels), coarse = run(panels / 2);
  return {fine, std::abs(fine - coarse), 0.0};
}

namespace {

// L-part integral of m u_* over Q; the layer below h0 comes from self-similarity.
// u_* is integrated against the limit set: D u_* lives where r in (2, 4).
Estimate radial_energy(const Counterexample& ce, const QuadratureOptions& opt, double m,
                       const std::function<double(double)>& density, bool unbounded_growth) {
  const CantorApprox& c = ce.cantor();
  const double h0 = std::ldexp(1.0, -opt.grading_levels);
  const auto gaps = limit_gap_levels(c, 0.5, h0, 2.0);
  const auto breaks = radial_breaks(gaps, {2.0, 4.0});
  auto compute = [&](int panels, int order) {
    const GaussRule rule = gauss_legendre(order + 2);
    const HIntegrator hi(h0, 1.0, breaks, panels, order);
    return 2.0 * hi.run([&](double h) {
      return xbar_integral(gaps, 0.0, h, 2.0, 4.0, rule, [&](double r) { return density(m * psi_star(r) / h); });
    });
  };
  const double fine = compute(opt.panels_per_level, opt.gauss_order);
  const double coarse = compute(std::max(1, opt.panels_per_level / 2), opt.gauss_order - 2);
  const double eps = c.params().eps;
  const double K = m * kPsiMax;
  const double KM = measure_constant(c);
  auto bound = [&](double h) {
    double b = 2.0 * KM * std::pow(4.0, eps) * K * std::pow(h, eps) / eps;
    if (unbounded_growth) b *= std::log(h + K) - std::log(h) + 1.0 / eps;
    return b;
  };
  auto layer = [&](int panels, int order) {
    const SelfSimilarTail t(c, h0, 2.0, 4.0, panels, order);
    return t.run([&](double r, double h) { return density(m * psi_star(r) / h); }, bound);
  };
  const double tail = layer(opt.panels_per_level, opt.gauss_order);
  const double tail_coarse = layer(std::max(1, opt.panels_per_level / 2), opt.gauss_order - 2);
  return {fine + tail, std::abs(fine - coarse) + std::abs(tail - tail_coarse), tail};
}

}  // namespace

Estimate FractalQuadrature::energy_u0(double m) const {
  const IntegrandSpec spec = certificate_spec(ce_.config());
  Estimate e = radial_energy(ce_, opt_, m, [&](double t) { return profile_F(spec, t).v; },
                             spec.kind == LKind::product && spec.growth.unbounded());
  const double s = spec.s;
  if (s > 0.0) e.value += std::pow(s, spec.q) * coefficient_integral();
  return e;
}

Estimate FractalQuadrature::modular_u0(double m) const {
  const IntegrandSpec spec = certificate_spec(ce_.config());
  const bool product = spec.kind == LKind::product;
  return radial_energy(
      ce_, opt_, m, [&](double t) { return product ? t * spec.growth(t) : t; },
      product && spec.growth.unbounded());
}

Estimate FractalQuadrature::gradient_power_between(double p, double h_lo, double h_hi, double outer) const {
  const auto gaps = limit_gap_levels(ce_.cantor(), outer, h_lo, 2.0);
  const auto breaks = radial_breaks(gaps, {2.0, 4.0});
  auto compute = [&](int panels, int order) {
    const GaussRule rule = gauss_legendre(order + 2);
    const HIntegrator hi(h_lo, h_hi, breaks, panels, order);
    return 2.0 * hi.run([&](double h) {
      return xbar_integral(gaps, 0.0, h, 2.0, 4.0, rule, [&](double r) { return std::pow(psi_star(r) / h, p); });
    });
  };
  const double fine = compute(opt_.panels_per_level, opt_.gauss_order);
  const double coarse = compute(std::max(1, opt_.panels_per_level / 2), opt_.gauss_order - 2);
  return {fine, std::abs(fine - coarse), 0.0};
}

Estimate FractalQuadrature::gradient_power_layered(double p, double h_lo, double h_hi, double outer) const {
  const double eps = ce_.config().cantor.eps;
  const double lam = ce_.cantor().lambda();
  // the layer recursion needs the band inside the first-level gap scale
  double hs = h_lo;
  while (hs > (1.0 - 2.0 * lam) / 8.0) hs *= 0.5;
  Estimate e = gradient_power_between(p, h_lo, h_hi, outer);
  if (p >= 1.0 + eps) {
    e.tail = std::numeric_limits<double>::infinity();
    return e;
  }
  Estimate mid = gradient_power_between(p, hs, h_lo, outer);
  const double KM = measure_constant(ce_.cantor());
  auto bound = [&](double h) {
    return 2.0 * std::pow(kPsiMax, p) * KM * std::pow(4.0, eps) * std::pow(h, 1.0 + eps - p) / (1.0 + eps - p);
  };
  auto layer = [&](int panels, int order) {
    const SelfSimilarTail t(ce_.cantor(), hs, 2.0, 4.0, panels, order);
    return t.run([&](double r, double h) { return std::pow(psi_star(r) / h, p); }, bound);
  };
  const double tail = layer(opt_.panels_per_level, opt_.gauss_order);
  const double coarse = layer(std::max(1, opt_.panels_per_level / 2), opt_.gauss_order - 2);
  e.tail = tail + mid.value;
  e.value += e.tail;
  e.error += mid.error + std::abs(tail - coarse);
  return e;
}

Estimate FractalQuadrature::gradient_power(double p) const {
  Estimate e = gradient_power_layered(p, h0(), 1.0, 0.5);
  if (!std::isfinite(e.tail)) e.value = e.tail;
  return e;
}

double FractalQuadrature::coefficient_integral() const {
  const CantorApprox& c = ce_.cantor();
  const auto gaps = gap_levels(c, 0.5);
  const double alpha = ce_.config().alpha;
  const GaussRule rule = gauss_legendre(opt_.gauss_order + 2);
  const HIntegrator hi(h0(), 1.0, radial_breaks(gaps, {0.5, 2.0}), opt_.panels_per_level, opt_.gauss_order);
  const double main = 2.0 * hi.run([&](double h) {
    return std::pow(h, alpha) * xbar_integral(gaps, set_measure(c), h, 0.0, 2.0, rule, chi_a);
  });
  return main + 4.0 * std::pow(h0(), 1.0 + alpha) / (1.0 + alpha);
}

Estimate FractalQuadrature::power_conjugate_b() const {
  const CantorApprox& c = ce_.cantor();
  const auto gaps = gap_levels(c, 0.5);
  const double alpha = ce_.config().alpha, q = ce_.config().q, eps = ce_.config().cantor.eps;
  const double meas = set_measure(c);
  std::vector<double> breaks;
  for (const GapLevel& g : gaps) breaks.push_back(g.size);
  auto compute = [&](int panels, int order) {
    const HIntegrator hi(h0(), 1.0, breaks, panels, order);
    return 2.0 * hi.run([&](double h) {
      double m = meas;
      for (const GapLevel& g : gaps) m += g.count * std::min(g.size, h);
      return m * power_conjugate(std::pow(h, alpha), q, std::pow(h, -eps));
    });
  };
  const double fine = compute(opt_.panels_per_level, opt_.gauss_order);
  const double coarse = compute(std::max(1, opt_.panels_per_level / 2), opt_.gauss_order - 2);
  const double qc = q / (q - 1.0);
  const double e = eps - eps * qc - alpha / (q - 1.0);
  const double tail = 2.0 * measure_constant(c) * std::pow(0.5, eps) * (1.0 - 1.0 / q) *
                      std::pow(q, -1.0 / (q - 1.0)) * std::pow(h0(), e + 1.0) / (e + 1.0);
  return {fine + tail, std::abs(fine - coarse), tail};
}

double FractalQuadrature::chain_bound(double sigma) const {
  const double qc = ce_.config().q_conj();
  return std::pow(sigma * z_bound_constant(), qc) * power_conjugate_b().upper();
}

namespace {

// Integral over |x_n| in [h0, 1] of sum over x-bar pieces of f(|z|, h), both signs.
template <class F>
double z_layer_integral(const Counterexample& ce, const HIntegrator& hint, int order, F&& f) {
  const GaussRule rule = gauss_legendre(order);
  const auto centres = ce.measure().centers_1d();
  const double zs = ce.config().z_scale;
  return 2.0 * hint.run([&](double h) {
    std::vector<double> edges;
    edges.reserve(centres.size() * 4);
    for (double a : centres)
      for (double off : {-0.5, -0.25, 0.25, 0.5}) edges.push_back(a + off * h);
    std::sort(edges.begin(), edges.end());
    KahanSum s;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const double a = edges[k], b = edges[k + 1];
      if (!(b > a)) continue;
      const auto [m1, m2] = ce.dual_z_2d(0.5 * (a + b), h);
      if (m1 == 0.0 && m2 == 0.0) continue;
      s += integrate_gauss(rule, a, b, [&](double x1) {
        const auto [z1, z2] = ce.dual_z_2d(x1, h);
        return f(zs * std::hypot(z1, z2), h);
      });
    }
    return s.value();
  });
}

}  // namespace

Estimate FractalQuadrature::power_conjugate_z() const {
  const double alpha = ce_.config().alpha, q = ce_.config().q, eps = ce_.config().cantor.eps;
  auto f = [&](double r, double h) { return power_conjugate(std::pow(h, alpha), q, r); };
  auto compute = [&](int panels, int order) {
    const HIntegrator hi(h0(), 1.0, {}, panels, order);
    return z_layer_integral(ce_, hi, order, f);
  };
  const double fine = compute(opt_.panels_per_level, opt_.gauss_order);
  const double coarse = compute(std::max(1, opt_.panels_per_level / 2), opt_.gauss_order - 2);
  const double qc = q / (q - 1.0);
  const double e = eps - eps * qc - alpha / (q - 1.0);
  const double tail = 2.0 * measure_constant(ce_.cantor()) * std::pow(0.5, eps) * (1.0 - 1.0 / q) *
                      std::pow(z_bound_constant(), qc) * std::pow(q, -1.0 / (q - 1.0)) *
                      std::pow(h0(), e + 1.0) / (e + 1.0);
  return {fine + tail, std::abs(fine - coarse), tail};
}

Estimate FractalQuadrature::conjugate_energy(double sigma) const {
  const IntegrandSpec spec = certificate_spec(ce_.config());
  const double alpha = ce_.config().alpha, q = ce_.config().q, eps = ce_.config().cantor.eps;
  auto f = [&](double r, double h) { return fast_conjugate(spec, std::pow(h, alpha), sigma * r); };
  auto compute = [&](int panels, int order) {
    const HIntegrator hi(h0(), 1.0, {}, panels, order);
    return z_layer_integral(ce_, hi, order, f);
  };
  const double fine = compute(opt_.panels_per_level, opt_.gauss_order);
  const double coarse = compute(std::max(1, opt_.panels_per_level / 2), opt_.gauss_order - 2);
  const double qc = q / (q - 1.0);
  const double e = eps - eps * qc - alpha / (q - 1.0);
  const double tail = 2.0 * measure_constant(ce_.cantor()) * std::pow(0.5, eps) * (1.0 - 1.0 / q) *
                      std::pow(sigma * z_bound_constant(), qc) * std::pow(q, -1.0 / (q - 1.0)) *
                      std::pow(h0(), e + 1.0) / (e + 1.0);
  // H(x, 0) = a s^q is subtracted wherever z = 0; that region contributes -s^q int a.
  double zero_part = 0.0;
  if (spec.s > 0.0) zero_part = -std::pow(spec.s, q) * coefficient_integral();
  return {fine + tail + zero_part, std::abs(fine - coarse), tail};
}

CounterexampleConfig select_parameters(CounterexampleConfig c, double kappa, const QuadratureOptions& options) {
  c.validate();
  if (!(kappa > 0.0)) throw InvalidConfig("kappa must be positive");
  c.kappa = kappa;
  c.z_scale = 1.0;
  const IntegrandSpec spec = certificate_spec(c);
  spec.validate();
  c.lambda_used = smallest_lambda(spec).admissible();
  c.c_tilde = std::pow(2.0, c.q + 2.0) * c.lambda_used * c.lambda_used;
  const bool unbounded = spec.kind == LKind::product && spec.growth.unbounded();
  const double eps = c.cantor.eps;
  c.delta_exponent = unbounded ? 0.5 * std::min(eps, c.alpha) : 0.0;

  const Counterexample ce(c);
  const FractalQuadrature quad(ce, options);
  const Estimate pairing = quad.pairing();
  c.pairing = pairing.value;
  c.z_scale = 1.0 / pairing.value;

  const Counterexample scaled(c);
  const FractalQuadrature sq(scaled, options);
  c.c_lower = sq.power_conjugate_z().upper() + sq.power_conjugate_b().upper();
  const double d = c.delta_exponent;
  const double a_int = spec.s > 0.0 ? std::pow(spec.s, c.q) * sq.coefficient_integral() : 0.0;
  c.c_upper = d > 0.0 ? 2.0 / d * sq.gradient_power(1.0 + d).upper() + a_int
                      : 2.0 * sq.gradient_power(1.0).upper() + a_int;

  const double qc = c.q_conj();
  const double rhs = kappa / (4.0 * c.c_tilde);
  const int n = c.cantor.n;
  for (int k = 0; k <= 600; ++k) {
    const double m = std::ldexp(1.0, k);
    const bool first = std::pow(m, c.alpha * qc - (1.0 + c.alpha)) * c.c_lower < rhs;
    const bool second = std::ldexp(1.0, n) * std::pow(m, d - c.alpha) * (c.c_upper + 1.0) < rhs;
    if (first && second) {
      c.m_star = m;
      c.sigma_star = std::pow(m, c.alpha);
      return c;
    }
  }
  throw Infeasible("no power of two up to 2^600 satisfies the selection inequalities");
}

CounterexampleConfig select_parameters(CounterexampleConfig draft, double kappa) {
  return select_parameters(std::move(draft), kappa, QuadratureOptions{});
}

GapCertificate lavrentiev_certificate(const CounterexampleConfig& config, const CertificateOptions& options) {
  config.validate();
  if (std::abs(config.sigma_star - std::pow(config.m_star, config.alpha)) > 1e-9 * config.sigma_star)
    throw InvalidConfig("sigma_* must equal m_*^alpha");
  GapCertificate cert;
  cert.config = config;
  const double m = config.m_star, sigma = config.sigma_star;

  CounterexampleConfig raw = config;
  raw.z_scale = 1.0;
  {
    const Counterexample ce(raw);
    cert.pairing_raw = FractalQuadrature(ce, options.quadrature).pairing();
    CounterexampleConfig deeper = raw;
    deeper.cantor.depth += 1;
    const Counterexample ce2(deeper);
    cert.pairing_next_depth = FractalQuadrature(ce2, options.quadrature).pairing();
  }
  cert.rescale_factor = 1.0 / cert.pairing_raw.value;
  cert.config.z_scale = cert.rescale_factor;
  cert.config.pairing = cert.pairing_raw.value;

  const Counterexample ce(cert.config);
  const FractalQuadrature quad(ce, options.quadrature);
  // after rescaling the pairing is exactly one; its relative error carries over
  const double pairing_rel_err = cert.pairing_raw.error / cert.pairing_raw.value;

  cert.I1_upper = quad.energy_u0(m);
  cert.Hstar = quad.conjugate_energy(sigma);
  cert.chain_bound = quad.chain_bound(sigma);
  cert.threshold = 0.5 * m * sigma;
  cert.I_inf_lower = sigma * m - cert.Hstar.value;
  cert.gap = cert.I_inf_lower - cert.I1_upper.value;
  cert.gap_lower = cert.gap - cert.Hstar.error - cert.I1_upper.error - sigma * m * pairing_rel_err;
  cert.slack_bound = 0.375 * sigma * m + cert.I1_upper.value;
  const double lhs = cert.I1_upper.upper() + cert.Hstar.upper();
  cert.margin = 1.0 - lhs / cert.threshold;
  cert.inequality_67 = lhs < cert.threshold;

  const Estimate G = quad.modular_u0(m);
  const double Gstar = std::pow(sigma, config.q_conj()) * quad.power_conjugate_b().upper();
  cert.inequality_68 = G.upper() + Gstar < config.kappa * m * sigma / (2.0 * config.c_tilde);

  cert.valid = cert.inequality_67 && cert.gap_lower > cert.threshold;
  if (!cert.inequality_67)
    cert.reason = "H(u0) + H*(sigma z) does not stay below m sigma / 2";
  else if (!(cert.gap_lower > cert.threshold))
    cert.reason = "error bars swamp the gap margin";
  else
    cert.reason = "ok";

  if (options.discrete_check) {
    auto grid = std::make_shared<const Grid>(2, options.discrete_nodes);
    ObstacleProblem prob;
    prob.grid = grid;
    prob.integrand = certificate_spec(cert.config);
    prob.integrand.s = 1.0;
    prob.alpha = config.alpha;
    prob.a = [&ce](std::span<const double> x) { return ce.coefficient_a(x); };
    prob.boundary = GridFunction(grid, [&ce](std::span<const double> x) { return ce.u0_tilde(x); });
    IntegrandSpec spec = prob.integrand;
    spec.delta_moll = 1e-6;
    SolverOptions so;
    so.max_iter = 20000;
    const SolveResult r = minimize(prob, spec, 0.0, so);
    DiscreteCrossCheck dc;
    dc.nodes = options.discrete_nodes;
    dc.energy = r.report.energy;
    dc.converged = r.report.converged;
    dc.below_upper = dc.energy <= cert.I1_upper.upper() * 1.01;
    dc.below_lower = dc.energy < cert.I_inf_lower;
    cert.discrete = dc;
  }
  return cert;
}

std::string to_json(const GapCertificate& c) {
  auto est = [](const Estimate& e) {
    return nlohmann::json{{"value", e.value}, {"error", e.error}, {"tail_bound", e.tail}};
  };
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(to_text(c.config));
  j["pairing_before_rescaling"] = est(c.pairing_raw);
  j["pairing_next_depth"] = est(c.pairing_next_depth);
  j["rescale_factor"] = c.rescale_factor;
  j["I1_upper"] = est(c.I1_upper);
  j["Hstar"] = est(c.Hstar);
  j["chain_bound"] = c.chain_bound;
  j["threshold_m_sigma_half"] = c.threshold;
  j["I_inf_lower"] = c.I_inf_lower;
  j["gap"] = c.gap;
  j["gap_lower"] = c.gap_lower;
  j["three_eighths_bound"] = c.slack_bound;
  j["margin"] = c.margin;
  j["inequality_6_7"] = c.inequality_67;
  j["inequality_6_8"] = c.inequality_68;
  j["status"] = c.valid ? "VALID" : "INVALID";
  j["reason"] = c.reason;
  if (c.discrete) {
    j["discrete"] = {{"nodes", c.discrete->nodes},
                     {"energy", c.discrete->energy},
                     {"converged", c.discrete->converged},
                     {"below_I1_upper", c.discrete->below_upper},
                     {"below_I_inf_lower", c.discrete->below_lower}};
  }
  return j.dump(2);
}

}  // namespace dplab
