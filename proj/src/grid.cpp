#include "dplab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dplab/errors.hpp"
#include "dplab/numerics.hpp"

namespace dplab {

namespace {

std::vector<double> axis_coords(int count, bool graded, const Grading& g) {
  if (count < 2) throw InvalidConfig("grid needs at least 2 nodes per axis");
  std::vector<double> x(count);
  for (int i = 0; i < count; ++i) x[i] = -1.0 + 2.0 * i / (count - 1);
  x.front() = -1.0;
  x.back() = 1.0;
  if (graded && g.levels > 0) {
    if (count % 2 == 0) throw InvalidConfig("graded axis needs an odd node count so x_n = 0 is a node");
    if (!(g.ratio > 0.0 && g.ratio < 1.0)) throw InvalidConfig("grading ratio must lie in (0,1)");
    x[count / 2] = 0.0;
    const double h = 2.0 / (count - 1);
    double t = h;
    for (int k = 1; k <= g.levels; ++k) {
      t *= g.ratio;
      x.push_back(t);
      x.push_back(-t);
    }
    std::sort(x.begin(), x.end());
  }
  return x;
}

constexpr std::size_t kBlock = 4096;

}  // namespace

Grid::Grid(int n, int nodes_per_axis, Grading grading) : Grid(n, std::vector<int>(n, nodes_per_axis), grading) {}

Grid::Grid(int n, std::vector<int> nodes, Grading grading) : n_(n), grading_(grading) {
  if (n < 1 || n > 3) throw InvalidConfig("grid dimension must be 1, 2 or 3");
  if (static_cast<int>(nodes.size()) != n) throw InvalidConfig("node count list must have n entries");
  for (int a = 0; a < n; ++a) coords_.push_back(axis_coords(nodes[a], a == n - 1, grading));
  node_stride_.assign(n, 1);
  cell_stride_.assign(n, 1);
  for (int a = n - 2; a >= 0; --a) {
    node_stride_[a] = node_stride_[a + 1] * coords_[a + 1].size();
    cell_stride_[a] = cell_stride_[a + 1] * (coords_[a + 1].size() - 1);
  }
  num_nodes_ = node_stride_[0] * coords_[0].size();
  num_cells_ = cell_stride_[0] * (coords_[0].size() - 1);
}

double Grid::min_spacing() const {
  double h = 2.0;
  for (int a = 0; a < n_; ++a)
    for (int i = 0; i + 1 < nodes(a); ++i) h = std::min(h, spacing(a, i));
  return h;
}

std::size_t Grid::node_index(std::span<const int> idx) const {
  std::size_t k = 0;
  for (int a = 0; a < n_; ++a) k += node_stride_[a] * idx[a];
  return k;
}

void Grid::node_multi(std::size_t k, std::span<int> idx) const {
  for (int a = 0; a < n_; ++a) {
    idx[a] = static_cast<int>(k / node_stride_[a]);
    k %= node_stride_[a];
  }
}

std::size_t Grid::cell_index(std::span<const int> idx) const {
  std::size_t c = 0;
  for (int a = 0; a < n_; ++a) c += cell_stride_[a] * idx[a];
  return c;
}

void Grid::cell_multi(std::size_t c, std::span<int> idx) const {
  for (int a = 0; a < n_; ++a) {
    idx[a] = static_cast<int>(c / cell_stride_[a]);
    c %= cell_stride_[a];
  }
}

Vector Grid::node_point(std::size_t k) const {
  int idx[3];
  node_multi(k, {idx, static_cast<std::size_t>(n_)});
  Vector x(n_);
  for (int a = 0; a < n_; ++a) x[a] = coords_[a][idx[a]];
  return x;
}

Vector Grid::cell_center(std::size_t c) const {
  int idx[3];
  cell_multi(c, {idx, static_cast<std::size_t>(n_)});
  Vector x(n_);
  for (int a = 0; a < n_; ++a) x[a] = 0.5 * (coords_[a][idx[a]] + coords_[a][idx[a] + 1]);
  return x;
}

double Grid::cell_volume(std::size_t c) const {
  int idx[3];
  cell_multi(c, {idx, static_cast<std::size_t>(n_)});
  double v = 1.0;
  for (int a = 0; a < n_; ++a) v *= spacing(a, idx[a]);
  return v;
}

double Grid::node_volume(std::size_t k) const {
  int idx[3];
  node_multi(k, {idx, static_cast<std::size_t>(n_)});
  double v = 1.0;
  for (int a = 0; a < n_; ++a) {
    double s = 0.0;
    if (idx[a] > 0) s += spacing(a, idx[a] - 1);
    if (idx[a] + 1 < nodes(a)) s += spacing(a, idx[a]);
    v *= 0.5 * s;
  }
  return v;
}

bool Grid::is_boundary(std::size_t k) const {
  int idx[3];
  node_multi(k, {idx, static_cast<std::size_t>(n_)});
  for (int a = 0; a < n_; ++a)
    if (idx[a] == 0 || idx[a] == nodes(a) - 1) return true;
  return false;
}

void Grid::cell_corners(std::size_t c, std::span<std::size_t> out) const {
  int idx[3];
  cell_multi(c, {idx, static_cast<std::size_t>(n_)});
  const std::size_t base = node_index({idx, static_cast<std::size_t>(n_)});
  for (int corner = 0; corner < (1 << n_); ++corner) {
    std::size_t k = base;
    for (int a = 0; a < n_; ++a)
      if (corner & (1 << a)) k += node_stride_[a];
    out[corner] = k;
  }
}

GridFunction::GridFunction(GridPtr grid, double fill) : grid_(std::move(grid)), values_(grid_->num_nodes(), fill) {}

GridFunction::GridFunction(GridPtr grid, const std::function<double(std::span<const double>)>& f)
    : GridFunction(std::move(grid)) {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const Vector x = grid_->node_point(k);
    values_[k] = f({x.data(), static_cast<std::size_t>(x.size())});
  }
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}
double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

Box Box::cube(int n, double half) { return {std::vector<double>(n, -half), std::vector<double>(n, half)}; }

bool Box::contains(std::span<const double> x) const {
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  return true;
}

CellVectorField gradient(const GridFunction& w, Execution ex) {
  const Grid& g = w.grid();
  const int n = g.dim();
  CellVectorField out{w.grid_ptr(), n, std::vector<double>(g.num_cells() * n, 0.0)};
  const auto nc = static_cast<std::ptrdiff_t>(g.num_cells());
  const double scale = 1.0 / (1 << (n - 1));
  auto body = [&](std::ptrdiff_t c) {
    std::size_t corners[8];
    int idx[3];
    g.cell_corners(c, corners);
    g.cell_multi(c, {idx, static_cast<std::size_t>(n)});
    for (int a = 0; a < n; ++a) {
      double s = 0.0;
      for (int k = 0; k < (1 << n); ++k) s += (k & (1 << a) ? 1.0 : -1.0) * w[corners[k]];
      out.values[c * n + a] = s * scale / g.spacing(a, idx[a]);
    }
  };
  if (ex == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < nc; ++c) body(c);
  } else {
    for (std::ptrdiff_t c = 0; c < nc; ++c) body(c);
  }
  return out;
}

double integrate(const CellField& density, Execution ex) {
  const Grid& g = *density.grid;
  const std::size_t nc = g.num_cells();
  const auto nb = static_cast<std::ptrdiff_t>((nc + kBlock - 1) / kBlock);
  std::vector<double> partial(nb, 0.0);
  auto block = [&](std::ptrdiff_t b) {
    KahanSum s;
    const std::size_t end = std::min(nc, (b + 1) * kBlock);
    for (std::size_t c = b * kBlock; c < end; ++c) s += density.values[c] * g.cell_volume(c);
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

double integrate_over(const CellField& density, const Box& box) {
  const Grid& g = *density.grid;
  KahanSum s;
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    const Vector x = g.cell_center(c);
    if (box.contains({x.data(), static_cast<std::size_t>(x.size())})) s += density.values[c] * g.cell_volume(c);
  }
  return s.value();
}

CellField map_cells(const GridPtr& grid, const std::function<double(std::size_t)>& f) {
  CellField out{grid, std::vector<double>(grid->num_cells())};
  for (std::size_t c = 0; c < grid->num_cells(); ++c) out.values[c] = f(c);
  return out;
}

bool DifferenceField::inside(std::span<const int> idx) const {
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (idx[a] < lo[a] || idx[a] >= hi[a]) return false;
  return true;
}

namespace {

DifferenceField overlap_for(const GridFunction& w, std::span<const int> shift, int multiple) {
  const Grid& g = w.grid();
  const int n = g.dim();
  if (static_cast<int>(shift.size()) != n) throw InvalidConfig("shift must have n components");
  DifferenceField out{GridFunction(w.grid_ptr(), 0.0), std::vector<int>(n), std::vector<int>(n)};
  for (int a = 0; a < n; ++a) {
    const int s = shift[a] * multiple;
    out.lo[a] = std::max(0, -s);
    out.hi[a] = std::min(g.nodes(a), g.nodes(a) - s);
    if (out.hi[a] <= out.lo[a]) throw InvalidConfig("shift too large: empty overlap");
  }
  return out;
}

std::size_t shifted(const Grid& g, std::span<const int> idx, std::span<const int> shift, int times) {
  int j[3];
  for (int a = 0; a < g.dim(); ++a) j[a] = idx[a] + times * shift[a];
  return g.node_index({j, static_cast<std::size_t>(g.dim())});
}

}  // namespace

DifferenceField tau_h(const GridFunction& w, std::span<const int> shift) {
  DifferenceField out = overlap_for(w, shift, 1);
  const Grid& g = w.grid();
  int idx[3];
  const std::span<int> sidx{idx, static_cast<std::size_t>(g.dim())};
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    g.node_multi(k, sidx);
    if (!out.inside(sidx)) continue;
    out.values[k] = w[shifted(g, sidx, shift, 1)] - w[k];
  }
  return out;
}

DifferenceField tau2_h(const GridFunction& w, std::span<const int> shift) {
  DifferenceField out = overlap_for(w, shift, 2);
  const Grid& g = w.grid();
  int idx[3];
  const std::span<int> sidx{idx, static_cast<std::size_t>(g.dim())};
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    g.node_multi(k, sidx);
    if (!out.inside(sidx)) continue;
    out.values[k] = w[shifted(g, sidx, shift, 2)] - 2.0 * w[shifted(g, sidx, shift, 1)] + w[k];
  }
  return out;
}

SeminormValue gagliardo_seminorm(const GridFunction& w, double alpha0, double p, const Box& sub, double cutoff) {
  if (p < 1.0) throw InvalidConfig("Gagliardo seminorm needs p >= 1");
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw InvalidConfig("alpha0 must lie in (0,1)");
  const Grid& g = w.grid();
  const int n = g.dim();
  // cell-centre samples inside the subdomain
  std::vector<Vector> pts;
  std::vector<double> val, vol;
  std::size_t corners[8];
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    Vector x = g.cell_center(c);
    if (!sub.contains({x.data(), static_cast<std::size_t>(n)})) continue;
    g.cell_corners(c, corners);
    double v = 0.0;
    for (int k = 0; k < (1 << n); ++k) v += w[corners[k]];
    pts.push_back(std::move(x));
    val.push_back(v / (1 << n));
    vol.push_back(g.cell_volume(c));
  }
  const auto m = static_cast<std::ptrdiff_t>(pts.size());
  const double expo = n + alpha0 * p;
  std::vector<double> row(m, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    KahanSum s;
    for (std::ptrdiff_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double d = (pts[i] - pts[j]).norm();
      if (d >= cutoff) continue;
      s += std::pow(std::abs(val[i] - val[j]), p) / std::pow(d, expo) * vol[j];
    }
    row[i] = s.value() * vol[i];
  }
  KahanSum near, lp;
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    near += row[i];
    lp += std::pow(std::abs(val[i]), p) * vol[i];
  }
  const double sphere = n == 1 ? 2.0 : (n == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi);
  const double tail = std::pow(2.0, p) * lp.value() * sphere * std::pow(cutoff, -alpha0 * p) / (alpha0 * p);
  return {std::pow(near.value(), 1.0 / p), std::pow(tail, 1.0 / p)};
}

double nikolskii_seminorm(const GridFunction& w, double alpha0, double p, const Box& sub, int K) {
  if (p < 1.0) throw InvalidConfig("Nikol'skii seminorm needs p >= 1");
  const Grid& g = w.grid();
  const int n = g.dim();
  double margin = 2.0;
  for (int a = 0; a < n; ++a) margin = std::min({margin, sub.lo[a] + 1.0, 1.0 - sub.hi[a]});
  if (margin <= 0.0) throw InvalidConfig("subdomain must lie strictly inside the grid");
  const double hmax = margin / K;
  const double h0 = 2.0 / (g.nodes(0) - 1);
  const int rmax = static_cast<int>(std::floor(hmax / h0 + 1e-12));
  if (rmax < 1) throw InvalidConfig("grid too coarse for the Nikol'skii shift range");

  std::vector<std::size_t> inner;
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    const Vector x = g.node_point(k);
    if (sub.contains({x.data(), static_cast<std::size_t>(n)})) inner.push_back(k);
  }
  if (inner.empty()) throw InvalidConfig("subdomain contains no grid nodes");
  double best = 0.0;
  int idx[3], sh[3] = {0, 0, 0};
  const std::span<int> sidx{idx, static_cast<std::size_t>(n)};
  const int span_count = 2 * rmax + 1;
  int total = 1;
  for (int a = 0; a < n; ++a) total *= span_count;
  for (int code = 0; code < total; ++code) {
    int rem = code;
    for (int a = 0; a < n; ++a) {
      sh[a] = rem % span_count - rmax;
      rem /= span_count;
    }
    KahanSum s;
    bool ok = true;
    Vector hv(n);
    for (std::size_t i : inner) {
      g.node_multi(i, sidx);
      for (int a = 0; a < n; ++a) {
        if (idx[a] + sh[a] < 0 || idx[a] + sh[a] >= g.nodes(a)) ok = false;
      }
      if (!ok) break;
      const std::size_t j = shifted(g, sidx, {sh, static_cast<std::size_t>(n)}, 1);
      s += std::pow(std::abs(w[j] - w[i]), p) * g.node_volume(i);
    }
    if (!ok) continue;
    const Vector xi = g.node_point(inner.front());
    g.node_multi(inner.front(), sidx);
    const Vector xj = g.node_point(shifted(g, sidx, {sh, static_cast<std::size_t>(n)}, 1));
    const double hn = (xj - xi).norm();
    if (hn == 0.0 || hn > hmax * (1.0 + 1e-12)) continue;
    best = std::max(best, std::pow(s.value(), 1.0 / p) / std::pow(hn, alpha0));
  }
  return best;
}

WolffValue wolff_potential(const CellField& f, std::span<const double> x0, double r, double sigma, double theta,
                           double m) {
  const Grid& g = *f.grid;
  if (!g.uniform()) throw InvalidConfig("Wolff potential needs a uniform grid");
  const int n = g.dim();
  const double h = 2.0 / (g.nodes(0) - 1);
  if (r < h) throw InvalidConfig("radius smaller than one cell");
  for (int a = 0; a < n; ++a)
    if (x0[a] - r < -1.0 - 1e-12 || x0[a] + r > 1.0 + 1e-12) throw InvalidConfig("ball must lie inside Q");

  // summed-area table over cells, padded by one
  std::vector<int> ext(n);
  std::vector<std::size_t> stride(n, 1);
  for (int a = 0; a < n; ++a) ext[a] = g.cells(a) + 1;
  for (int a = n - 2; a >= 0; --a) stride[a] = stride[a + 1] * ext[a + 1];
  std::vector<double> sat(stride[0] * ext[0], 0.0);
  int idx[3];
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    g.cell_multi(c, {idx, static_cast<std::size_t>(n)});
    std::size_t k = 0;
    for (int a = 0; a < n; ++a) k += stride[a] * (idx[a] + 1);
    sat[k] = f.values[c];
  }
  for (int a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < sat.size(); ++k) {
      const int coord = static_cast<int>((k / stride[a]) % ext[a]);
      if (coord > 0) sat[k] += sat[k - stride[a]];
    }
  }
  const double cell_vol = std::pow(h, n);
  // average over cells whose centres lie in the cube of half-side rho
  auto box_average = [&](double rho, double& volume) {
    int lo[3], hi[3];
    long long count = 1;
    for (int a = 0; a < n; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::ceil((x0[a] - rho + 1.0) / h - 0.5 - 1e-9)));
      hi[a] = std::min(g.cells(a) - 1, static_cast<int>(std::floor((x0[a] + rho + 1.0) / h - 0.5 + 1e-9)));
      if (hi[a] < lo[a]) {
        const int c = std::clamp(static_cast<int>((x0[a] + 1.0) / h), 0, g.cells(a) - 1);
        lo[a] = hi[a] = c;
      }
      count *= hi[a] - lo[a] + 1;
    }
    double s = 0.0;
    for (int corner = 0; corner < (1 << n); ++corner) {
      std::size_t k = 0;
      int sign = 1;
      for (int a = 0; a < n; ++a) {
        if (corner & (1 << a)) {
          k += stride[a] * lo[a];
          sign = -sign;
        } else {
          k += stride[a] * (hi[a] + 1);
        }
      }
      s += sign * sat[k];
    }
    volume = count * cell_vol;
    return s / count;
  };

  const int J = static_cast<int>(std::floor(std::log2(r / h)));
  WolffValue out;
  out.shells = J + 1;
  KahanSum total, holder;
  for (int j = 0; j <= J; ++j) {
    const double rho = r * std::ldexp(1.0, -j);
    const double weight = j < J ? (std::pow(rho, sigma) - std::pow(0.5 * rho, sigma)) / sigma
                                : std::pow(rho, sigma) / sigma;
    double volume = 0.0;
    const double avg = box_average(rho, volume);
    total += std::pow(std::max(avg, 0.0), theta) * weight;
    if (m > 0.0) holder += std::pow(volume, -theta / m) * weight;
  }
  out.value = total.value();
  out.holder_constant = holder.value();
  return out;
}

namespace {

double bump(double rho) { return rho < 1.0 ? std::exp(-1.0 / (1.0 - rho * rho)) : 0.0; }

}  // namespace

GridFunction mollify(const GridFunction& w, double eps) {
  const Grid& g = w.grid();
  const int n = g.dim();
  double hmax = 0.0;
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < g.cells(a); ++i) hmax = std::max(hmax, g.spacing(a, i));
  if (eps < 2.0 * hmax * (1.0 - 1e-9)) throw InvalidConfig("eps below grid resolution");
  GridFunction out(w.grid_ptr(), 0.0);
  const auto nn = static_cast<std::ptrdiff_t>(g.num_nodes());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < nn; ++k) {
    int idx[3], lo[3], hi[3], j[3];
    g.node_multi(k, {idx, static_cast<std::size_t>(n)});
    for (int a = 0; a < n; ++a) {
      const auto c = g.coords(a);
      lo[a] = static_cast<int>(std::upper_bound(c.begin(), c.end(), c[idx[a]] - eps) - c.begin());
      hi[a] = static_cast<int>(std::lower_bound(c.begin(), c.end(), c[idx[a]] + eps) - c.begin());
    }
    double num = 0.0, den = 0.0;
    for (int a = 0; a < n; ++a) j[a] = lo[a];
    while (true) {
      double d2 = 0.0;
      for (int a = 0; a < n; ++a) {
        const double d = g.coords(a)[j[a]] - g.coords(a)[idx[a]];
        d2 += d * d;
      }
      const double kv = bump(std::sqrt(d2) / eps);
      if (kv > 0.0) {
        const std::size_t node = g.node_index({j, static_cast<std::size_t>(n)});
        const double wgt = kv * g.node_volume(node);
        num += wgt * w[node];
        den += wgt;
      }
      int a = n - 1;
      while (a >= 0 && ++j[a] >= hi[a]) {
        j[a] = lo[a];
        --a;
      }
      if (a < 0) break;
    }
    out[k] = num / den;
  }
  return out;
}

GridFunction mollify_truncate(const GridFunction& w, double eps, double theta_exp) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidConfig("eps must lie in (0,1)");
  const double cap = std::pow(eps, -theta_exp);
  GridFunction t = w;
  for (double& v : t.values()) v = std::clamp(v, -cap, cap);
  return mollify(t, eps);
}

void write_csv(std::ostream& os, const GridFunction& w) {
  const Grid& g = w.grid();
  for (int a = 0; a < g.dim(); ++a) os << 'x' << a + 1 << ',';
  os << "value\n";
  os.precision(17);
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    const Vector x = g.node_point(k);
    for (int a = 0; a < g.dim(); ++a) os << x[a] << ',';
    os << w[k] << '\n';
  }
}

GridFunction read_csv(std::istream& is, GridPtr grid) {
  GridFunction w(grid, 0.0);
  std::string line;
  std::getline(is, line);
  std::size_t k = 0;
  while (std::getline(is, line) && k < w.size()) {
    const auto pos = line.find_last_of(',');
    w[k++] = std::stod(line.substr(pos + 1));
  }
  if (k != w.size()) throw InvalidConfig("CSV row count does not match the grid");
  return w;
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidConfig("truncated binary grid function");
  return v;
}

}  // namespace

void write_binary(std::ostream& os, const GridFunction& w) {
  const Grid& g = w.grid();
  os.write("DPLG", 4);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, g.dim());
  const int base = g.uniform() ? g.nodes(g.dim() - 1) : g.nodes(g.dim() - 1) - 2 * g.grading().levels;
  for (int a = 0; a < g.dim(); ++a) put<std::uint32_t>(os, a == g.dim() - 1 ? base : g.nodes(a));
  put<double>(os, g.grading().ratio);
  put<std::uint32_t>(os, g.grading().levels);
  for (double v : w.values()) put<double>(os, v);
}

GridFunction read_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "DPLG", 4) != 0) throw InvalidConfig("not a grid function dump");
  if (get<std::uint32_t>(is) != 1) throw InvalidConfig("unsupported dump version");
  const int n = static_cast<int>(get<std::uint32_t>(is));
  if (n < 1 || n > 3) throw InvalidConfig("bad dimension in dump");
  std::vector<int> counts(n);
  for (auto& c : counts) c = static_cast<int>(get<std::uint32_t>(is));
  Grading gr;
  gr.ratio = get<double>(is);
  gr.levels = static_cast<int>(get<std::uint32_t>(is));
  auto grid = std::make_shared<const Grid>(n, counts, gr);
  GridFunction w(grid, 0.0);
  for (double& v : w.values()) v = get<double>(is);
  return w;
}

}  // namespace dplab
