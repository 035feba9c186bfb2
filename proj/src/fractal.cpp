#include "dplab/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>

#include "dplab/errors.hpp"
#include "dplab/numerics.hpp"

namespace dplab {

double CantorParams::lambda() const { return std::pow(0.5, (n - 1.0) / (n - 1.0 - eps)); }

void CantorParams::validate() const {
  if (n != 2 && n != 3) throw InvalidConfig("Cantor construction supports n = 2 or n = 3");
  if (!(eps > 0.0) || !(eps < n - 1.0)) throw InvalidConfig("eps must lie in (0, n-1)");
  if (depth < 1 || depth > 30) throw InvalidConfig("depth must lie in [1, 30]");
}

CantorApprox::CantorApprox(const CantorParams& params) : params_(params) {
  params_.validate();
  lambda_ = params_.lambda();
  intervals_ = level_intervals(params_.depth);
}

double CantorApprox::length(int level) const { return std::pow(lambda_, level); }

double CantorApprox::gap(int level) const { return length(level - 1) - 2.0 * length(level); }

std::vector<Interval> CantorApprox::level_intervals(int level) const {
  std::vector<Interval> cur{{-0.5, 0.5}};
  for (int i = 1; i <= level; ++i) {
    const double li = length(i);
    std::vector<Interval> next;
    next.reserve(cur.size() * 2);
    for (const Interval& iv : cur) {
      next.push_back({iv.lo, iv.lo + li});
      next.push_back({iv.hi - li, iv.hi});
    }
    cur = std::move(next);
  }
  return cur;
}

double CantorApprox::distance_1d(double x) const {
  auto it = std::lower_bound(intervals_.begin(), intervals_.end(), x,
                             [](const Interval& iv, double v) { return iv.hi < v; });
  double d = std::numeric_limits<double>::infinity();
  if (it != intervals_.end()) d = std::max(0.0, it->lo - x);
  if (it != intervals_.begin()) d = std::min(d, x - std::prev(it)->hi);
  return d;
}

double CantorApprox::distance_slope_1d(double x) const {
  auto it = std::lower_bound(intervals_.begin(), intervals_.end(), x,
                             [](const Interval& iv, double v) { return iv.hi < v; });
  if (it != intervals_.end() && it->lo <= x) return 0.0;
  const double right = it != intervals_.end() ? it->lo - x : std::numeric_limits<double>::infinity();
  const double left = it != intervals_.begin() ? x - std::prev(it)->hi : std::numeric_limits<double>::infinity();
  return left <= right ? 1.0 : -1.0;
}

double CantorApprox::distance(std::span<const double> xbar) const {
  double d = 0.0;
  for (double v : xbar) d = std::max(d, distance_1d(v));
  return d;
}

std::vector<long long> CantorApprox::box_counts(int k_min, int k_max) const {
  std::vector<long long> out;
  for (int k = k_min; k <= k_max; ++k) {
    const double side = length(k);
    long long count = 0;
    long long last = -1;
    for (const Interval& iv : intervals_) {
      long long first = static_cast<long long>(std::floor((iv.lo + 0.5) / side));
      long long end = static_cast<long long>(std::ceil((iv.hi + 0.5) / side)) - 1;
      first = std::max(first, last + 1);
      if (end >= first) {
        count += end - first + 1;
        last = end;
      }
    }
    long long per_axis = count;
    for (int a = 1; a < params_.n - 1; ++a) count *= per_axis;
    out.push_back(count);
  }
  return out;
}

double CantorApprox::box_counting_slope(int k_min, int k_max) const {
  const auto counts = box_counts(k_min, k_max);
  const int m = static_cast<int>(counts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    const double x = -std::log(length(k_min + i));
    const double y = std::log(static_cast<double>(counts[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

CantorMeasureApprox::CantorMeasureApprox(const CantorApprox& approx)
    : level_(approx.depth()), dim_(approx.params().n - 1) {
  centers_.reserve(approx.intervals().size());
  for (const Interval& iv : approx.intervals()) centers_.push_back(iv.center());
  weight_ = std::pow(2.0, -static_cast<double>(level_) * dim_);
}

std::size_t CantorMeasureApprox::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dim_; ++a) s *= centers_.size();
  return s;
}

std::vector<Atom> CantorMeasureApprox::atoms() const {
  std::vector<Atom> out;
  out.reserve(size());
  if (dim_ == 1) {
    for (double c : centers_) out.push_back({{c}, weight_});
  } else {
    for (double c0 : centers_)
      for (double c1 : centers_) out.push_back({{c0, c1}, weight_});
  }
  return out;
}

CantorBuild build_cantor(const CantorParams& params) {
  CantorApprox approx(params);
  CantorMeasureApprox measure(approx);
  return {std::move(approx), std::move(measure)};
}

void CounterexampleConfig::validate() const {
  cantor.validate();
  if (!(alpha > 0.0) || !(alpha <= 1.0)) throw InvalidConfig("alpha must lie in (0, 1]");
  if (!(q > 1.0 + alpha)) throw Infeasible("the counterexample needs q > 1 + alpha");
  if (!(cantor.eps < q - 1.0 - alpha)) throw InvalidConfig("eps must lie in (0, q - 1 - alpha)");
  if (!(m_star >= 1.0) || !(sigma_star >= 1.0) || !(kappa > 0.0))
    throw InvalidConfig("m_star, sigma_star must be >= 1 and kappa > 0");
}

namespace {

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

// 1 - S((r - lo) / (hi - lo)) and its r-derivative
std::pair<double, double> ramp_down(double r, double lo, double hi) {
  const auto [v, d] = smoothstep((r - lo) / (hi - lo));
  return {1.0 - v, -d / (hi - lo)};
}

}  // namespace

Counterexample::Counterexample(CounterexampleConfig config, CantorBuild build)
    : config_(std::move(config)), build_(std::move(build)) {
  prepare();
}

Counterexample::Counterexample(const CounterexampleConfig& config)
    : Counterexample(config, build_cantor(config.cantor)) {}

void Counterexample::prepare() {
  const auto c = build_.measure.centers_1d();
  for (auto& p : prefix_) p.assign(c.size() + 1, 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    double pw = 1.0;
    for (int i = 0; i < 4; ++i) {
      prefix_[i][k + 1] = prefix_[i][k] + pw;
      pw *= c[k];
    }
  }
}

double Counterexample::sphere_normalisation() const {
  return dim() == 2 ? 0.5 : 0.5 / std::numbers::pi;
}

double Counterexample::dist(std::span<const double> x) const {
  return cantor().distance(x.first(x.size() - 1));
}

CutoffValues Counterexample::cutoffs(std::span<const double> x) const {
  const int n = dim();
  const double xn = x[n - 1];
  if (xn == 0.0) throw SingularPoint("cutoffs are singular on the plane x_n = 0");
  const double h = std::abs(xn);
  const double d = dist(x);
  const double r = d / h;

  Vector grad_r = Vector::Zero(n);
  if (d > 0.0) {
    if (n == 2) {
      grad_r[0] = cantor().distance_slope_1d(x[0]) / h;
    } else {
      const double d0 = cantor().distance_1d(x[0]);
      const double d1 = cantor().distance_1d(x[1]);
      const int axis = d0 >= d1 ? 0 : 1;
      grad_r[axis] = cantor().distance_slope_1d(x[axis]) / h;
    }
  }
  grad_r[n - 1] = -r * sgn(xn) / h;

  const auto [cs, dcs] = ramp_down(r, 2.0, 4.0);
  const auto [ca, dca] = ramp_down(r, 0.5, 2.0);
  return {cs, ca, dcs * grad_r, dca * grad_r};
}

double Counterexample::phi(std::span<const double> x) const {
  double p = 1.0;
  for (double v : x) p *= ramp_down(std::abs(v), 0.75, 5.0 / 6.0).first;
  return p;
}

Vector Counterexample::grad_phi(std::span<const double> x) const {
  const int n = dim();
  std::vector<double> val(n), der(n);
  for (int i = 0; i < n; ++i) {
    const auto [v, d] = ramp_down(std::abs(x[i]), 0.75, 5.0 / 6.0);
    val[i] = v;
    der[i] = d * sgn(x[i]);
  }
  Vector g(n);
  for (int i = 0; i < n; ++i) {
    double p = der[i];
    for (int j = 0; j < n; ++j)
      if (j != i) p *= val[j];
    g[i] = p;
  }
  return g;
}

double Counterexample::u_star(std::span<const double> x) const {
  const double xn = x[dim() - 1];
  if (xn == 0.0) return 0.0;
  return 0.5 * sgn(xn) * cutoffs(x).chi_star;
}

Vector Counterexample::grad_u_star(std::span<const double> x) const {
  const double xn = x[dim() - 1];
  if (xn == 0.0) throw SingularPoint("u_* jumps across x_n = 0");
  return 0.5 * sgn(xn) * cutoffs(x).grad_chi_star;
}

double Counterexample::u_tilde(std::span<const double> x) const { return (1.0 - phi(x)) * u_star(x); }

Vector Counterexample::grad_u_tilde(std::span<const double> x) const {
  const double p = phi(x);
  if (p == 1.0) return Vector::Zero(dim());
  return -grad_phi(x) * u_star(x) + (1.0 - p) * grad_u_star(x);
}

double Counterexample::coefficient_a(std::span<const double> x) const {
  const double xn = x[dim() - 1];
  if (xn == 0.0) return 0.0;
  return std::pow(std::abs(xn), config_.alpha) * cutoffs(x).chi_a;
}

double Counterexample::weight_b(std::span<const double> x) const {
  const double h = std::abs(x[dim() - 1]);
  if (h == 0.0) return 0.0;
  return dist(x) <= 0.5 * h ? std::pow(h, -config_.cantor.eps) : 0.0;
}

std::pair<double, double> Counterexample::dual_z_2d(double x1, double x2) const {
  const auto c = build_.measure.centers_1d();
  const double h = std::abs(x2);
  if (h < 1e-12) {
    auto it = std::lower_bound(c.begin(), c.end(), x1 - 1e-12);
    if (it != c.end() && *it <= x1 + 1e-12) throw AtomCollision("point coincides with a Cantor atom");
    if (h == 0.0) return {0.0, 0.0};
  }
  const double w = build_.measure.weight();

  // power sums of rho = |x1 - a| over atoms with rho in (h/4, h/2), per side
  auto side_sums = [&](double lo, double hi, bool right, double S[4]) {
    const auto b = std::upper_bound(c.begin(), c.end(), lo) - c.begin();
    const auto e = std::lower_bound(c.begin(), c.end(), hi) - c.begin();
    for (int j = 0; j < 4; ++j) S[j] = 0.0;
    if (e <= b) return;
    if (e - b <= 64) {
      for (auto k = b; k < e; ++k) {
        const double rho = right ? x1 - c[k] : c[k] - x1;
        double p = 1.0;
        for (int j = 0; j < 4; ++j) {
          S[j] += p;
          p *= rho;
        }
      }
      return;
    }
    double P[4];
    for (int i = 0; i < 4; ++i) P[i] = prefix_[i][e] - prefix_[i][b];
    // right: rho = x1 - a; left: rho = a - x1
    const double s = right ? 1.0 : -1.0;
    const double X = x1;
    S[0] = P[0];
    S[1] = s * (X * P[0] - P[1]);
    S[2] = X * X * P[0] - 2.0 * X * P[1] + P[2];
    S[3] = s * (X * X * X * P[0] - 3.0 * X * X * P[1] + 3.0 * X * P[2] - P[3]);
  };

  double R[4], L[4];
  side_sums(x1 - 0.5 * h, x1 - 0.25 * h, true, R);
  side_sums(x1 + 0.25 * h, x1 + 0.5 * h, false, L);

  // theta'(rho/h) = 24 (-16 rho^2/h^2 + 12 rho/h - 2)
  const double ih = 1.0 / h;
  auto poly = [&](const double* S, int shift) {
    return 24.0 * (-16.0 * S[2 + shift] * ih * ih + 12.0 * S[1 + shift] * ih - 2.0 * S[shift]);
  };
  const double cn = sphere_normalisation() * w;
  const double z2 = cn * ih * (poly(R, 0) + poly(L, 0));
  const double z1 = cn * sgn(x2) * ih * ih * (poly(R, 1) - poly(L, 1));
  return {z1, z2};
}

Vector Counterexample::dual_z(std::span<const double> x) const {
  const int n = dim();
  Vector z = Vector::Zero(n);
  if (n == 2) {
    const auto [z1, z2] = dual_z_2d(x[0], x[1]);
    z << z1, z2;
    return z * config_.z_scale;
  }
  const auto c = build_.measure.centers_1d();
  const double xn = x[2];
  const double h = std::abs(xn);
  const double w = build_.measure.weight();
  if (h < 1e-12) {
    for (double a0 : c)
      for (double a1 : c)
        if (std::hypot(x[0] - a0, x[1] - a1) < 1e-12) throw AtomCollision("point coincides with a Cantor atom");
    if (h == 0.0) return z;
  }
  const double cn = sphere_normalisation() * w;
  auto range = [&](double v) {
    const auto b = std::upper_bound(c.begin(), c.end(), v - 0.5 * h) - c.begin();
    const auto e = std::lower_bound(c.begin(), c.end(), v + 0.5 * h) - c.begin();
    return std::pair{b, e};
  };
  const auto [b0, e0] = range(x[0]);
  const auto [b1, e1] = range(x[1]);
  for (auto i = b0; i < e0; ++i) {
    for (auto j = b1; j < e1; ++j) {
      const double d0 = x[0] - c[i], d1 = x[1] - c[j];
      const double rho = std::hypot(d0, d1);
      const double r = rho / h;
      if (r <= 0.25 || r >= 0.5) continue;
      const double tp = 4.0 * smoothstep(4.0 * r - 1.0).second;
      const double f = cn * tp * sgn(xn) / (rho * h * h);
      z[0] += f * d0;
      z[1] += f * d1;
      z[2] += cn * tp / (rho * h);
    }
  }
  return z * config_.z_scale;
}

std::string to_text(const CantorApprox& approx) {
  nlohmann::json j;
  j["n"] = approx.params().n;
  j["eps"] = approx.params().eps;
  j["depth"] = approx.depth();
  j["lambda"] = approx.lambda();
  j["target_dimension"] = approx.params().target_dimension();
  j["intervals_per_axis"] = approx.intervals().size();
  std::size_t atoms = 1;
  for (int a = 0; a < approx.params().n - 1; ++a) atoms *= approx.intervals().size();
  j["atoms"] = atoms;
  j["distance"] = approx.params().n == 2 ? "euclidean" : "sup-norm product";
  return j.dump(2);
}

std::string to_text(const CounterexampleConfig& c) {
  nlohmann::json j;
  j["n"] = c.cantor.n;
  j["eps"] = c.cantor.eps;
  j["depth"] = c.cantor.depth;
  j["lambda"] = c.cantor.lambda();
  j["atoms"] = static_cast<std::size_t>(std::pow(2.0, c.cantor.depth * (c.cantor.n - 1)));
  j["alpha"] = c.alpha;
  j["q"] = c.q;
  j["m_star"] = c.m_star;
  j["sigma_star"] = c.sigma_star;
  j["kappa"] = c.kappa;
  j["Lambda"] = c.lambda_used;
  j["c_tilde"] = c.c_tilde;
  j["c_lower"] = c.c_lower;
  j["c_upper"] = c.c_upper;
  j["delta_exponent"] = c.delta_exponent;
  j["pairing"] = c.pairing;
  j["rescale_factor"] = c.z_scale;
  j["ramp"] = "cubic smoothstep";
  return j.dump(2);
}

}  // namespace dplab
