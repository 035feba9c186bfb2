#include "dplab/integrand.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "dplab/errors.hpp"

namespace dplab {

int GrowthFunction::compositions() const {
  switch (kind) {
    case GrowthKind::constant_one: return 0;
    case GrowthKind::log: return 1;
    case GrowthKind::iterated_log: return level + 1;
  }
  return 0;
}

double GrowthFunction::operator()(double t) const {
  if (kind == GrowthKind::constant_one) return 1.0;
  double v = t;
  for (int k = 0; k < compositions(); ++k) v = std::log1p(v);
  return v;
}

Jet GrowthFunction::jet(double t) const {
  if (kind == GrowthKind::constant_one) return {1.0, 0.0, 0.0};
  Jet j{t, 1.0, 0.0};
  for (int k = 0; k < compositions(); ++k) {
    const double inv = 1.0 / (1.0 + j.v);
    j = {std::log1p(j.v), j.d1 * inv, j.d2 * inv - j.d1 * j.d1 * inv * inv};
  }
  return j;
}

double GrowthFunction::threshold() const {
  if (!unbounded()) return 0.0;
  double lo = 0.0, hi = 1.0;
  while ((*this)(hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((*this)(mid) >= 1.0 ? hi : lo) = mid;
  }
  return std::max(1.0, hi);
}

void IntegrandSpec::validate() const {
  if (!(q > 1.0 && q < 2.0)) throw InvalidConfig("q must lie in (1,2)");
  if (!(mu >= 1.0)) throw InvalidConfig("mu must be >= 1");
  if (kind == LKind::product && !(mu < 2.0)) throw InvalidConfig("mu must be < 2");
  if (!(s >= 0.0 && s <= 1.0)) throw InvalidConfig("s must lie in [0,1]");
  if (!(lambda >= 1.0)) throw InvalidConfig("Lambda must be >= 1");
  if (!(delta_moll >= 0.0)) throw InvalidConfig("delta_moll must be >= 0");
  if (kind == LKind::area && !(area_p > 1.0)) throw InvalidConfig("area exponent must exceed 1");
  if (growth.kind == GrowthKind::iterated_log && growth.level < 1)
    throw InvalidConfig("iterated-log level must be >= 1");
}

bool IntegrandSpec::solver_admissible() const { return kind == LKind::product && mu < 2.0; }

namespace {

// F(t) on the raw radial variable.
Jet raw_F(const IntegrandSpec& spec, double t) {
  if (spec.kind == LKind::product) {
    const Jet g = spec.growth.jet(t);
    return {t * g.v, g.v + t * g.d1, 2.0 * g.d1 + t * g.d2};
  }
  const double p = spec.area_p;
  if (t == 0.0) return {0.0, 0.0, p == 2.0 ? 1.0 : (p < 2.0 ? std::numeric_limits<double>::infinity() : 0.0)};
  const double tp = std::pow(t, p);
  const double base = 1.0 + tp;
  const double root = std::pow(base, 1.0 / p);
  const double v = std::expm1(std::log1p(tp) / p);
  // F' = t^{p-1} (1+t^p)^{1/p-1},  F'' = (p-1) t^{p-2} (1+t^p)^{1/p-2}
  const double d1 = std::pow(t, p - 1.0) * root / base;
  const double d2 = (p - 1.0) * std::pow(t, p - 2.0) * root / (base * base);
  return {v, d1, d2};
}

}  // namespace

Jet profile_F(const IntegrandSpec& spec, double t) {
  const double d = spec.delta_moll;
  if (d == 0.0) return raw_F(spec, t);
  const double l = std::sqrt(d * d + t * t);
  const Jet f = raw_F(spec, l);
  // l' = t/l, l'' = d^2/l^3
  const double l1 = t / l;
  const double l2 = d * d / (l * l * l);
  return {f.v, f.d1 * l1, f.d2 * l1 * l1 + f.d1 * l2};
}

Jet profile_H(const IntegrandSpec& spec, double a, double t) {
  Jet j = profile_F(spec, t);
  if (a != 0.0) {
    const double s = spec.q_shift();
    const double q = spec.q;
    const double l2 = s * s + t * t;
    if (l2 == 0.0) return j;
    const double lq2 = std::pow(l2, 0.5 * q - 1.0);
    j.v += a * lq2 * l2;
    j.d1 += a * q * lq2 * t;
    j.d2 += a * q * lq2 * (1.0 + (q - 2.0) * t * t / l2);
  }
  return j;
}

namespace {

Matrix radial_hessian(std::span<const double> z, double t, double d1_over_t, double d2) {
  const auto n = static_cast<Eigen::Index>(z.size());
  Eigen::Map<const Vector> zv(z.data(), n);
  const Vector e = zv / t;
  return d1_over_t * Matrix::Identity(n, n) + (d2 - d1_over_t) * e * e.transpose();
}

// F'(t)/t, finite at t = 0 whenever F'(0) = 0 and F is C^2 there.
double slope_over_t(const Jet& j, double t) { return t > 0.0 ? j.d1 / t : j.d2; }

}  // namespace

double eval_L(const IntegrandSpec& spec, std::span<const double> z) {
  return profile_F(spec, norm(z)).v;
}

Vector grad_L(const IntegrandSpec& spec, std::span<const double> z) {
  const auto n = static_cast<Eigen::Index>(z.size());
  const double t = norm(z);
  Vector g = Vector::Zero(n);
  if (t == 0.0) return g;
  const Jet j = profile_F(spec, t);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = j.d1 * z[i] / t;
  return g;
}

Matrix hess_L(const IntegrandSpec& spec, std::span<const double> z) {
  const auto n = static_cast<Eigen::Index>(z.size());
  const double t = norm(z);
  if (t == 0.0) {
    if (spec.delta_moll == 0.0) throw SingularPoint("hess_L at z = 0 without smoothing");
    const Jet j = profile_F(spec, 0.0);
    return j.d2 * Matrix::Identity(n, n);
  }
  const Jet j = profile_F(spec, t);
  return radial_hessian(z, t, slope_over_t(j, t), j.d2);
}

double eval_H(const IntegrandSpec& spec, CoefficientSample a, std::span<const double> z) {
  return profile_H(spec, a.a, norm(z)).v;
}

Vector grad_H(const IntegrandSpec& spec, CoefficientSample a, std::span<const double> z) {
  const auto n = static_cast<Eigen::Index>(z.size());
  const double t = norm(z);
  Vector g = Vector::Zero(n);
  if (t == 0.0) return g;
  const Jet j = profile_H(spec, a.a, t);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = j.d1 * z[i] / t;
  return g;
}

Matrix hess_H(const IntegrandSpec& spec, CoefficientSample a, std::span<const double> z) {
  const auto n = static_cast<Eigen::Index>(z.size());
  const double t = norm(z);
  if (t == 0.0) {
    if (spec.delta_moll == 0.0 && (spec.q_shift() == 0.0 || spec.kind == LKind::area))
      throw SingularPoint("hess_H at z = 0 without smoothing");
    const Jet j = profile_H(spec, a.a, 0.0);
    return j.d2 * Matrix::Identity(n, n);
  }
  const Jet j = profile_H(spec, a.a, t);
  return radial_hessian(z, t, slope_over_t(j, t), j.d2);
}

double eval_modular_G(const IntegrandSpec& spec, CoefficientSample a, std::span<const double> z) {
  const double t = norm(z);
  return t * spec.growth(t) + a.a * std::pow(t, spec.q);
}

double eval_E_star(const IntegrandSpec& spec, CoefficientSample a, double t) {
  if (spec.mu >= 2.0) throw InvalidConfig("E_* requires mu < 2");
  if (t < 0.0) throw InvalidConfig("E_* requires t >= 0");
  const double e = 2.0 - spec.mu;
  const double l1 = std::sqrt(1.0 + t * t);
  double v = std::expm1(e * std::log(l1)) / e;
  if (a.a != 0.0) {
    const double s = spec.s;
    const double q = spec.q;
    v += a.a / q * (std::pow(s * s + t * t, 0.5 * q) - std::pow(s, q));
  }
  return v;
}

double threshold_T_mu(const IntegrandSpec& spec) {
  const double e = 2.0 - spec.mu;
  if (e <= 0.0) throw InvalidConfig("T_mu requires mu < 2");
  auto fails = [&](double t) {
    return t > 2.0 * std::pow(eval_E_star(spec, {0.0, 1.0}, t), 1.0 / e);
  };
  // The failure set is an interval [0, T); locate its right end by bisection.
  double hi = 1.0;
  while (fails(hi)) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fails(mid) ? lo : hi) = mid;
  }
  return hi;
}

double sup_slope_L(const IntegrandSpec& spec) {
  if (spec.kind == LKind::area) return 1.0;
  if (spec.growth.unbounded()) return std::numeric_limits<double>::infinity();
  return 1.0;
}

double power_conjugate(double c, double q, double r) {
  if (r == 0.0) return 0.0;
  // sup_t { r t - c t^q } at t = (r/(qc))^{1/(q-1)}
  const double t = std::pow(r / (q * c), 1.0 / (q - 1.0));
  return r * t * (1.0 - 1.0 / q);
}

ConjugateResult conjugate_radial(const IntegrandSpec& spec, double a, double r, double radial_tol) {
  if (r < 0.0) r = -r;
  const double h0 = profile_H(spec, a, 0.0).v;
  if (r == 0.0) return {-h0, 0.0};
  if (a <= 0.0 && r >= sup_slope_L(spec))
    throw UnboundedConjugate("conjugate is +inf: |w| exceeds the slope bound of L");
  auto phi = [&](double t) { return r * t - profile_H(spec, a, t).v; };
  auto slope = [&](double t) { return profile_H(spec, a, t).d1; };
  // phi is concave with phi'(t) = r - H'(t); if H'(0+) >= r the sup sits at 0.
  if (slope(0.0) >= r) return {-h0, 0.0};
  double hi = 1.0;
  while (slope(hi) < r) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw UnboundedConjugate("radial bracket diverged");
  }
  double lo = 0.0;
  // golden section on the concave profile
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = phi(x1), f2 = phi(x2);
  for (int it = 0; it < 40; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = phi(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = phi(x1);
    }
  }
  // Newton polish on H'(t) = r, safeguarded by the bracket [lo, hi] widened to
  // a sign change.
  double a_lo = lo, a_hi = hi;
  while (a_lo > 0.0 && slope(a_lo) > r) a_lo *= 0.5;
  if (slope(a_lo) > r) a_lo = 0.0;
  while (slope(a_hi) < r) a_hi *= 2.0;
  double t = 0.5 * (x1 + x2);
  for (int it = 0; it < 100; ++it) {
    const Jet j = profile_H(spec, a, t);
    const double res = j.d1 - r;
    if (res > 0.0) a_hi = t; else a_lo = t;
    double next = (j.d2 > 0.0) ? t - res / j.d2 : 0.5 * (a_lo + a_hi);
    if (!(next > a_lo && next < a_hi)) next = 0.5 * (a_lo + a_hi);
    const double step = std::abs(next - t);
    t = next;
    if (step <= 1e-3 * radial_tol * std::max(1.0, t) || a_hi - a_lo <= 1e-16 * a_hi) break;
  }
  const double v = phi(t);
  if (v < -h0) return {-h0, 0.0};
  return {v, t};
}

double conjugate_H(const IntegrandSpec& spec, CoefficientSample a, std::span<const double> w,
                   double radial_tol) {
  return conjugate_radial(spec, a.a, norm(w), radial_tol).value;
}

Vector V_sp(double s, double p, std::span<const double> z) {
  if (!(p > 0.0)) throw InvalidConfig("V_sp requires p > 0");
  const auto n = static_cast<Eigen::Index>(z.size());
  const double t2 = s * s + norm(z) * norm(z);
  Vector v(n);
  const double f = (t2 == 0.0) ? 0.0 : std::pow(t2, 0.25 * (p - 2.0));
  for (Eigen::Index i = 0; i < n; ++i) v[i] = f * z[i];
  return v;
}

double LambdaReport::admissible() const {
  return std::max({sandwich_growth, lower_eig, upper_hess, 1.0});
}

LambdaReport smallest_lambda(const IntegrandSpec& spec, double t_min, double t_max, int samples) {
  // ratios whose maxima give the three parts of Lambda at radius t
  auto ratios = [&](double t) {
    const Jet f = profile_F(spec, t);
    const double g = spec.growth(t);
    const double tg = t * g;
    std::array<double, 3> r{1.0, 1.0, 1.0};
    if (tg > 0.0 && f.v > 0.0) r[0] = std::max(r[0], tg / f.v);
    r[0] = std::max(r[0], f.v / (tg + 1.0));
    const double tangential = f.d1 / t;
    const double lo = std::min(tangential, f.d2);
    const double hi = std::max(std::abs(tangential), std::abs(f.d2));
    const double w = std::pow(1.0 + t * t, 0.5 * spec.mu);
    r[1] = lo > 0.0 ? 1.0 / (lo * w) : std::numeric_limits<double>::infinity();
    r[2] = hi * std::sqrt(1.0 + t * t) / (g + 1.0);
    return r;
  };
  const double lmin = std::log(t_min), lmax = std::log(t_max);
  auto at = [&](int k) { return lmin + (lmax - lmin) * k / (samples - 1); };
  std::array<double, 3> best{1.0, 1.0, 1.0};
  std::array<int, 3> arg{0, 0, 0};
  for (int k = 0; k < samples; ++k) {
    const auto r = ratios(std::exp(at(k)));
    for (int i = 0; i < 3; ++i)
      if (r[i] > best[i]) {
        best[i] = r[i];
        arg[i] = k;
      }
  }
  // golden-section refinement between the neighbours of each sampled maximum
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(best[i])) continue;
    double lo = at(std::max(0, arg[i] - 1)), hi = at(std::min(samples - 1, arg[i] + 1));
    auto f = [&](double l) { return ratios(std::exp(l))[i]; };
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 > f2) {
        hi = x2; x2 = x1; f2 = f1; x1 = hi - gr * (hi - lo); f1 = f(x1);
      } else {
        lo = x1; x1 = x2; f1 = f2; x2 = lo + gr * (hi - lo); f2 = f(x2);
      }
    }
    best[i] = std::max({best[i], f1, f2});
  }
  LambdaReport rep;
  rep.sandwich_growth = best[0];
  rep.lower_eig = best[1];
  rep.upper_hess = best[2];
  return rep;
}

}  // namespace dplab
