#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dplab/errors.hpp"
#include "dplab/grid.hpp"

using namespace dplab;

namespace {

GridPtr make(int n, int nodes, Grading g = {}) { return std::make_shared<const Grid>(n, nodes, g); }

}  // namespace

TEST_CASE("indexing is row-major with the last axis fastest") {
  const auto g = make(2, 5);
  CHECK(g->num_nodes() == 25u);
  CHECK(g->num_cells() == 16u);
  const int idx[2] = {1, 3};
  CHECK(g->node_index(idx) == 8u);
  int back[2];
  g->node_multi(8, back);
  CHECK(back[0] == 1);
  CHECK(back[1] == 3);
  const Vector x = g->node_point(8);
  CHECK(x[0] == doctest::Approx(-0.5));
  CHECK(x[1] == doctest::Approx(0.5));
  CHECK(g->is_boundary(0));
  CHECK_FALSE(g->is_boundary(12));
}

TEST_CASE("graded grid adds geometric layers around x_n = 0") {
  const auto g = make(2, 9, {0.5, 3});
  CHECK(g->nodes(0) == 9);
  CHECK(g->nodes(1) == 15);
  const auto c = g->coords(1);
  CHECK(std::find(c.begin(), c.end(), 0.0) != c.end());
  CHECK(g->min_spacing() == doctest::Approx(0.25 * 0.125));
  CHECK_THROWS_AS(Grid(2, 8, Grading{0.5, 2}), InvalidConfig);
  double vol = 0.0;
  for (std::size_t k = 0; k < g->num_cells(); ++k) vol += g->cell_volume(k);
  CHECK(vol == doctest::Approx(4.0));
  double nv = 0.0;
  for (std::size_t k = 0; k < g->num_nodes(); ++k) nv += g->node_volume(k);
  CHECK(nv == doctest::Approx(4.0));
}

TEST_CASE("gradient is exact on affine functions, also graded and in 3-D") {
  for (const auto& g : {make(2, 9), make(2, 9, {0.5, 4}), make(3, 5, {0.5, 2})}) {
    const int n = g->dim();
    const GridFunction w(g, [&](std::span<const double> x) {
      double v = 0.3;
      for (int a = 0; a < n; ++a) v += (a + 1.5) * x[a];
      return v;
    });
    for (Execution ex : {Execution::serial, Execution::parallel}) {
      const CellVectorField d = gradient(w, ex);
      for (std::size_t c = 0; c < g->num_cells(); ++c)
        for (int a = 0; a < n; ++a) CHECK(d.at(c)[a] == doctest::Approx(a + 1.5).epsilon(1e-12));
    }
  }
}

TEST_CASE("integration: constants, boxes and serial/parallel agreement") {
  const auto g = make(2, 33, {0.5, 3});
  const CellField one = map_cells(g, [](std::size_t) { return 1.0; });
  CHECK(integrate(one) == doctest::Approx(4.0));
  CHECK(integrate_over(one, Box::cube(2, 0.5)) == doctest::Approx(1.0).epsilon(0.05));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CellField r{g, {}};
  for (std::size_t c = 0; c < g->num_cells(); ++c) r.values.push_back(u(rng));
  CHECK(integrate(r, Execution::serial) == integrate(r, Execution::parallel));
}

TEST_CASE("difference operators") {
  const auto g = make(2, 9);
  const GridFunction w(g, [](std::span<const double> x) { return x[0] * x[0] + x[1]; });
  const int shift[2] = {1, 0};
  const DifferenceField d1 = tau_h(w, shift);
  const DifferenceField d2 = tau2_h(w, shift);
  const double h = 0.25;
  for (std::size_t k = 0; k < g->num_nodes(); ++k) {
    int idx[2];
    g->node_multi(k, idx);
    if (d1.inside(idx)) {
      const Vector x = g->node_point(k);
      CHECK(d1.values[k] == doctest::Approx((x[0] + h) * (x[0] + h) - x[0] * x[0]));
    }
    if (d2.inside(idx)) CHECK(d2.values[k] == doctest::Approx(2 * h * h));
  }
}

TEST_CASE("seminorms vanish on constants and grow with roughness") {
  const auto g = make(2, 33);
  const GridFunction c(g, 2.0);
  const Box sub = Box::cube(2, 0.5);
  CHECK(gagliardo_seminorm(c, 0.5, 2.0, sub).value == 0.0);
  CHECK(nikolskii_seminorm(c, 0.5, 2.0, sub) == 0.0);
  const GridFunction smooth(g, [](std::span<const double> x) { return std::sin(x[0]); });
  const GridFunction rough(g, [](std::span<const double> x) { return std::sin(8 * x[0]); });
  CHECK(gagliardo_seminorm(rough, 0.5, 2.0, sub).value > gagliardo_seminorm(smooth, 0.5, 2.0, sub).value);
  CHECK(nikolskii_seminorm(rough, 0.5, 2.0, sub) > nikolskii_seminorm(smooth, 0.5, 2.0, sub));
  CHECK_THROWS_AS(nikolskii_seminorm(c, 0.5, 2.0, Box{{0.01, 0.01}, {0.02, 0.02}}), InvalidConfig);
  CHECK_THROWS_AS(gagliardo_seminorm(c, 1.5, 2.0, sub), InvalidConfig);
}

TEST_CASE("Wolff potential: closed form on constants, Hoelder bound") {
  const auto g = make(2, 65);
  const CellField f = map_cells(g, [](std::size_t) { return 3.0; });
  const double x0[2] = {0.0, 0.0};
  const WolffValue w = wolff_potential(f, x0, 0.5, 1.0, 2.0, 5.0);
  CHECK(w.value == doctest::Approx(9.0 * 0.5));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CellField r{g, {}};
  for (std::size_t c = 0; c < g->num_cells(); ++c) r.values.push_back(std::pow(u(rng), 4));
  const double m = 2 * 1.0 / 1.0 + 1;
  const WolffValue wr = wolff_potential(r, x0, 0.5, 1.0, 1.0, m);
  double lm = 0.0;
  for (std::size_t c = 0; c < g->num_cells(); ++c) lm += std::pow(r.values[c], m) * g->cell_volume(c);
  CHECK(wr.value <= wr.holder_constant * std::pow(lm, 1.0 / m) * (1 + 1e-12));
  CHECK_THROWS_AS(wolff_potential(f, x0, 1.5, 1.0, 1.0), InvalidConfig);
}

TEST_CASE("mollification preserves constants and ordering") {
  const auto g = make(2, 33);
  const GridFunction c(g, 1.5);
  const GridFunction mc = mollify(c, 0.25);
  for (std::size_t k = 0; k < g->num_nodes(); ++k) CHECK(mc[k] == doctest::Approx(1.5).epsilon(1e-14));
  const GridFunction a(g, [](std::span<const double> x) { return x[0]; });
  const GridFunction b(g, [](std::span<const double> x) { return x[0] + 0.1 * x[1] * x[1]; });
  const GridFunction ma = mollify(a, 0.25), mb = mollify(b, 0.25);
  for (std::size_t k = 0; k < g->num_nodes(); ++k) CHECK(mb[k] >= ma[k]);
  CHECK_THROWS_AS(mollify(c, 0.05), InvalidConfig);
  const GridFunction big(g, 100.0);
  const GridFunction t = mollify_truncate(big, 0.25, 1.0);
  CHECK(t.max() == doctest::Approx(4.0));
}

TEST_CASE("CSV and binary round trips") {
  const auto g = make(2, 9, {0.5, 2});
  const GridFunction w(g, [](std::span<const double> x) { return std::exp(x[0]) - x[1] / 3.0; });
  std::stringstream csv;
  write_csv(csv, w);
  const GridFunction wc = read_csv(csv, g);
  for (std::size_t k = 0; k < w.size(); ++k) CHECK(wc[k] == w[k]);
  std::stringstream bin;
  write_binary(bin, w);
  const GridFunction wb = read_binary(bin);
  CHECK(wb.grid().nodes(1) == g->nodes(1));
  for (std::size_t k = 0; k < w.size(); ++k) CHECK(wb[k] == w[k]);
  std::stringstream bad("XXXX");
  CHECK_THROWS(read_binary(bad));
}

TEST_CASE("gradient is exact for bilinear functions at cell centres") {
  const auto g = make(2, 65);
  const GridFunction w(g, [](std::span<const double> x) { return x[0] * x[1]; });
  const CellVectorField d = gradient(w);
  double err = 0.0;
  for (std::size_t c = 0; c < g->num_cells(); ++c) {
    const Vector x = g->cell_center(c);
    err = std::max({err, std::abs(d.at(c)[0] - x[1]), std::abs(d.at(c)[1] - x[0])});
  }
  CHECK(err < 1e-12);
}

TEST_CASE("midpoint quadrature converges at second order; graded agrees with uniform") {
  std::vector<double> errs;
  for (int nodes : {17, 33, 65}) {
    const auto g = make(2, nodes);
    const CellField d = map_cells(g, [&](std::size_t c) { return std::pow(g->cell_center(c)[0], 2); });
    errs.push_back(std::abs(integrate(d) - 4.0 / 3.0));
  }
  CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.05));
  CHECK(errs[1] / errs[2] == doctest::Approx(4.0).epsilon(0.05));
  const auto gu = make(2, 65), gg = make(2, 65, {0.5, 5});
  auto f = [](const Vector& x) { return std::cos(x[0]) * std::exp(x[1]); };
  const double iu = integrate(map_cells(gu, [&](std::size_t c) { return f(gu->cell_center(c)); }));
  const double ig = integrate(map_cells(gg, [&](std::size_t c) { return f(gg->cell_center(c)); }));
  CHECK(std::abs(iu - ig) < 2.0 * errs[2] * 10);
}

TEST_CASE("product rule for tau_h holds exactly") {
  const auto g = make(2, 17);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridFunction v(g), w(g), vw(g);
  for (std::size_t k = 0; k < g->num_nodes(); ++k) {
    v[k] = u(rng);
    w[k] = u(rng);
    vw[k] = v[k] * w[k];
  }
  const int shift[2] = {2, -1};
  const DifferenceField lhs = tau_h(vw, shift), tv = tau_h(v, shift), tw = tau_h(w, shift);
  for (std::size_t k = 0; k < g->num_nodes(); ++k) {
    int idx[2];
    g->node_multi(k, idx);
    if (!lhs.inside(idx)) continue;
    const int j[2] = {idx[0] + 2, idx[1] - 1};
    const double wj = w[g->node_index(j)];
    CHECK(lhs.values[k] == doctest::Approx(wj * tv.values[k] + v[k] * tw.values[k]).epsilon(1e-14));
  }
  const GridFunction lin(g, [](std::span<const double> x) { return x[0]; });
  const int s1[2] = {1, 0};
  const DifferenceField dl = tau_h(lin, s1);
  for (std::size_t k = 0; k < g->num_nodes(); ++k) {
    int idx[2];
    g->node_multi(k, idx);
    if (dl.inside(idx)) CHECK(dl.values[k] == doctest::Approx(0.125));
  }
  const int huge[2] = {40, 0};
  CHECK_THROWS_AS(tau_h(lin, huge), InvalidConfig);
}

TEST_CASE("operators are linear on random pairs") {
  const auto g = make(2, 17);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridFunction v(g), w(g), c(g);
  const double a = 1.7, b = -0.4;
  for (std::size_t k = 0; k < g->num_nodes(); ++k) {
    v[k] = u(rng);
    w[k] = u(rng);
    c[k] = a * v[k] + b * w[k];
  }
  const CellVectorField dv = gradient(v), dw = gradient(w), dc = gradient(c);
  for (std::size_t i = 0; i < dc.values.size(); ++i)
    CHECK(dc.values[i] == doctest::Approx(a * dv.values[i] + b * dw.values[i]).epsilon(1e-12).scale(1.0));
  const GridFunction mv = mollify(v, 0.3), mw = mollify(w, 0.3), mc = mollify(c, 0.3);
  for (std::size_t k = 0; k < g->num_nodes(); ++k)
    CHECK(mc[k] == doctest::Approx(a * mv[k] + b * mw[k]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("Gagliardo seminorm: stable for smooth data, jump detected at high order") {
  const Box sub = Box::cube(2, 0.5);
  std::vector<double> lin, hi, lo;
  for (int nodes : {33, 65, 129}) {
    const auto g = make(2, nodes);
    const GridFunction w(g, [](std::span<const double> x) { return x[0]; });
    // jump placed on a cell interface
    const GridFunction step(g, [](std::span<const double> x) { return x[0] > 1e-9 ? 1.0 : 0.0; });
    lin.push_back(gagliardo_seminorm(w, 0.5, 2.0, sub).value);
    hi.push_back(gagliardo_seminorm(step, 0.6, 2.0, sub).value);
    lo.push_back(gagliardo_seminorm(step, 0.3, 2.0, sub).value);
  }
  CHECK(std::abs(lin[2] - lin[1]) < 0.05 * lin[2]);
  CHECK(hi[2] / hi[1] > hi[1] / hi[0] * 0.9);
  CHECK(hi[2] / hi[1] > 1.03);
  CHECK(lo[2] / lo[1] < hi[2] / hi[1]);
  CHECK(lo[2] - lo[1] < lo[1] - lo[0]);
}

TEST_CASE("Wolff potential of zero and monotone in f") {
  const auto g = make(2, 33);
  const CellField z = map_cells(g, [](std::size_t) { return 0.0; });
  const double x0[2] = {0.1, -0.1};
  CHECK(wolff_potential(z, x0, 0.5, 1.0, 1.0).value == 0.0);
  const CellField f1 = map_cells(g, [&](std::size_t c) { return 1.0 + g->cell_center(c)[0]; });
  const CellField f2 = map_cells(g, [&](std::size_t c) { return 1.5 + g->cell_center(c)[0]; });
  CHECK(wolff_potential(f1, x0, 0.5, 1.0, 1.0).value < wolff_potential(f2, x0, 0.5, 1.0, 1.0).value);
}

TEST_CASE("mollification: truncation inactive for small data, W^{1,1} convergence") {
  const auto g = make(2, 257);
  const GridFunction w(g, [](std::span<const double> x) { return std::sin(2 * x[0]) * std::cos(x[1]); });
  const GridFunction a = mollify_truncate(w, 0.125, 1.0), b = mollify(w, 0.125);
  for (std::size_t k = 0; k < w.size(); ++k) CHECK(a[k] == b[k]);
  double prev = 1e300;
  for (double eps : {0.25, 0.125, 0.0625, 0.03125, 0.015625}) {
    const GridFunction m = mollify(w, eps);
    GridFunction d = m;
    for (std::size_t k = 0; k < w.size(); ++k) d[k] = m[k] - w[k];
    const CellVectorField dd = gradient(d);
    double l1 = 0.0;
    for (std::size_t c = 0; c < g->num_cells(); ++c) {
      std::size_t cn[4];
      g->cell_corners(c, cn);
      const double avg = 0.25 * (d[cn[0]] + d[cn[1]] + d[cn[2]] + d[cn[3]]);
      l1 += (std::abs(avg) + dd.norm_at(c)) * g->cell_volume(c);
    }
    CHECK(l1 < prev);
    prev = l1;
  }
  CHECK(prev < 1e-3 * 50);
}
