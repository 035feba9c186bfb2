#pragma once

// Brute-force reference for small 2-D obstacle problems on uniform grids with
// the logarithmic integrand: projected coordinate descent with exact 1-D
// minimisation by bisection on the derivative.  Deliberately shares no code
// with the library solver or its energy assembly.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

struct Instance {
  int nodes = 9;  // per axis on [-1, 1]^2
  double q = 1.8;
  double s = 1.0;
  double delta = 1e-6;
  std::vector<double> a;        // per cell, row-major (x1 slowest)
  std::vector<double> boundary;  // per node
  std::vector<double> obstacle;  // per node, empty when absent
};

inline double density(const Instance& in, double a, double t) {
  const double l = std::sqrt(in.delta * in.delta + t * t);
  return l * std::log1p(l) + a * std::pow(in.s * in.s + t * t, 0.5 * in.q);
}

// d density / dt divided by t
inline double slope_over_t(const Instance& in, double a, double t) {
  const double l = std::sqrt(in.delta * in.delta + t * t);
  const double dl = std::log1p(l) + l / (1.0 + l);
  return dl / l + a * in.q * std::pow(in.s * in.s + t * t, 0.5 * in.q - 1.0);
}

class Solver {
 public:
  explicit Solver(Instance in) : in_(std::move(in)), m_(in_.nodes), h_(2.0 / (m_ - 1)) {}

  int node(int i, int j) const { return i * m_ + j; }

  double energy(const std::vector<double>& u) const {
    double e = 0.0;
    for (int i = 0; i + 1 < m_; ++i)
      for (int j = 0; j + 1 < m_; ++j) e += cell_energy(u, i, j);
    return e;
  }

  std::vector<double> solve(int max_sweeps = 200000, double tol = 1e-14) const {
    std::vector<double> u = in_.boundary;
    for (int i = 1; i + 1 < m_; ++i)
      for (int j = 1; j + 1 < m_; ++j) {
        u[node(i, j)] = 0.0;
        if (!in_.obstacle.empty()) u[node(i, j)] = std::max(u[node(i, j)], in_.obstacle[node(i, j)]);
      }
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      double change = 0.0;
      for (int i = 1; i + 1 < m_; ++i)
        for (int j = 1; j + 1 < m_; ++j) {
          const int k = node(i, j);
          const double before = u[k];
          relax(u, i, j);
          change = std::max(change, std::abs(u[k] - before));
        }
      if (change < tol) break;
    }
    return u;
  }

  // dE/du_k at an interior node
  double derivative(const std::vector<double>& u, int i, int j) const {
    double d = 0.0;
    for (int ci = i - 1; ci <= i; ++ci)
      for (int cj = j - 1; cj <= j; ++cj) {
        const auto [gx, gy] = grad(u, ci, cj);
        const double t = std::hypot(gx, gy);
        const double so = slope_over_t(in_, in_.a[ci * (m_ - 1) + cj], t);
        // corner (i, j) relative to the cell's lower-left node
        const double sx = (i == ci + 1) ? 1.0 : -1.0;
        const double sy = (j == cj + 1) ? 1.0 : -1.0;
        d += h_ * h_ * so * (gx * sx + gy * sy) / (2.0 * h_);
      }
    return d;
  }

 private:
  std::pair<double, double> grad(const std::vector<double>& u, int i, int j) const {
    const double w00 = u[node(i, j)], w01 = u[node(i, j + 1)], w10 = u[node(i + 1, j)], w11 = u[node(i + 1, j + 1)];
    return {(w10 + w11 - w00 - w01) / (2.0 * h_), (w01 + w11 - w00 - w10) / (2.0 * h_)};
  }

  double cell_energy(const std::vector<double>& u, int i, int j) const {
    const auto [gx, gy] = grad(u, i, j);
    return h_ * h_ * density(in_, in_.a[i * (m_ - 1) + j], std::hypot(gx, gy));
  }

  void relax(std::vector<double>& u, int i, int j) const {
    const int k = node(i, j);
    const double lo_bound = in_.obstacle.empty() ? -1e300 : in_.obstacle[k];
    auto dfdx = [&](double v) {
      u[k] = v;
      return derivative(u, i, j);
    };
    if (!in_.obstacle.empty() && dfdx(lo_bound) >= 0.0) {
      u[k] = lo_bound;
      return;
    }
    double lo = u[k], hi = u[k];
    double step = 1e-3;
    if (!in_.obstacle.empty()) lo = std::max(lo, lo_bound);
    while (dfdx(lo) > 0.0) {
      lo -= step;
      step *= 2.0;
      if (!in_.obstacle.empty() && lo < lo_bound) {
        lo = lo_bound;
        break;
      }
    }
    step = 1e-3;
    while (dfdx(hi) < 0.0) {
      hi += step;
      step *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (dfdx(mid) < 0.0 ? lo : hi) = mid;
    }
    u[k] = 0.5 * (lo + hi);
  }

  Instance in_;
  int m_;
  double h_;
};

}  // namespace oracle
