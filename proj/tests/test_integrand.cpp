#include <doctest.h>

#include <cmath>
#include <random>

#include "dplab/errors.hpp"
#include "dplab/integrand.hpp"

using namespace dplab;

namespace {

IntegrandSpec log_spec() {
  IntegrandSpec s;
  s.growth = GrowthFunction::logarithmic();
  return s;
}

std::array<double, 2> vec(double r, double th) { return {r * std::cos(th), r * std::sin(th)}; }

}  // namespace

TEST_CASE("log integrand closed forms") {
  const IntegrandSpec s = log_spec();
  const double z0[2] = {0.0, 0.0};
  CHECK(eval_L(s, z0) == 0.0);
  const double e1 = std::exp(1.0) - 1.0;
  const double z1[2] = {e1, 0.0};
  CHECK(eval_L(s, z1) == doctest::Approx(e1).epsilon(1e-14));
  const double z2[2] = {1.0, 0.0};
  const Vector g = grad_L(s, z2);
  CHECK(g[0] == doctest::Approx(std::log(2.0) + 0.5).epsilon(1e-14));
  CHECK(g[1] == 0.0);
}

TEST_CASE("eval_H and modular closed forms") {
  IntegrandSpec s = log_spec();
  s.q = 1.8;
  const double z0[2] = {0.0, 0.0};
  CHECK(eval_H(s, {0.0, 1.0}, z0) == 0.0);
  const double z[2] = {2.0, 0.0};
  CHECK(eval_H(s, {1.0, 1.0}, z) == doctest::Approx(2.0 * std::log(3.0) + std::pow(2.0, 1.8)).epsilon(1e-14));
  CHECK(eval_H(s, {1.0, 1.0}, z) == doctest::Approx(5.67942).epsilon(1e-5));

  IntegrandSpec c;
  c.growth = GrowthFunction::constant_one();
  c.q = 2.0 - 1e-12;
  const double z3[2] = {3.0, 0.0};
  CHECK(eval_modular_G(c, {1.0, 1.0}, z3) == doctest::Approx(12.0).epsilon(1e-10));
  CHECK(eval_modular_G(s, {1.0, 1.0}, z0) == 0.0);
}

TEST_CASE("E_* closed form and threshold") {
  IntegrandSpec s = log_spec();
  s.mu = 1.0;
  for (double t : {0.0, 0.3, 2.0, 50.0}) CHECK(eval_E_star(s, {0.0, 1.0}, t) == doctest::Approx(std::sqrt(1 + t * t) - 1));
  s.mu = 1.5;
  const double T = threshold_T_mu(s);
  for (double t = T; t < 1e6; t *= 1.7) CHECK(t <= 2.0 * std::pow(eval_E_star(s, {0.0, 1.0}, t), 1.0 / 0.5) * (1 + 1e-12));
  s.mu = 2.0;
  CHECK_THROWS_AS(eval_E_star(s, {0.0, 1.0}, 1.0), InvalidConfig);
}

TEST_CASE("V_sp closed forms") {
  const double z[2] = {2.0, 0.0};
  const Vector v2 = V_sp(0.7, 2.0, z);
  CHECK(v2[0] == doctest::Approx(2.0));
  const Vector v4 = V_sp(0.0, 4.0, z);
  CHECK(v4[0] == doctest::Approx(4.0));
  CHECK(v4[1] == 0.0);
  CHECK_THROWS_AS(V_sp(0.0, 0.0, z), InvalidConfig);
}

TEST_CASE("conjugates") {
  CHECK(power_conjugate(1.0, 2.0, 3.0) == doctest::Approx(9.0 / 4.0));
  IntegrandSpec s = log_spec();
  s.q = 1.8;
  const double w0[2] = {0.0, 0.0};
  CHECK(conjugate_H(s, {0.5, 1.0}, w0) == doctest::Approx(0.0));
  // a = 0 and the slope of the log integrand is unbounded, so H^* stays finite;
  // with constant-one growth it is +inf beyond slope 1
  IntegrandSpec c;
  c.growth = GrowthFunction::constant_one();
  const double w[2] = {1.5, 0.0};
  CHECK_THROWS_AS(conjugate_H(c, {0.0, 1.0}, w), UnboundedConjugate);
}

TEST_CASE("conjugate stays below the analytic power bound") {
  IntegrandSpec s = log_spec();
  s.q = 1.8;
  for (double a : {0.05, 0.5, 1.0})
    for (double r : {0.1, 1.0, 10.0, 1e3, 1e6}) CHECK(conjugate_radial(s, a, r).value <= power_conjugate(a, 1.8, r) * (1 + 1e-10));
}

TEST_CASE("Fenchel-Young equality at the radial maximiser") {
  IntegrandSpec s = log_spec();
  s.q = 1.6;
  s.s = 0.3;
  for (double r : {0.5, 3.0, 40.0}) {
    const auto res = conjugate_radial(s, 0.7, r, 1e-10);
    const double lhs = profile_H(s, 0.7, res.argmax).v + res.value;
    CHECK(lhs == doctest::Approx(r * res.argmax).epsilon(1e-10));
  }
}

TEST_CASE("conjugate is convex along segments") {
  IntegrandSpec s = log_spec();
  s.q = 1.5;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int k = 0; k < 200; ++k) {
    const double w1[2] = {u(rng), u(rng)}, w2[2] = {u(rng), u(rng)};
    const double wm[2] = {0.5 * (w1[0] + w2[0]), 0.5 * (w1[1] + w2[1])};
    const CoefficientSample a{0.4, 1.0};
    CHECK(conjugate_H(s, a, wm) <= 0.5 * (conjugate_H(s, a, w1) + conjugate_H(s, a, w2)) + 1e-8);
  }
}

TEST_CASE("growth functions: monotone, concave, t g(t) convex, subpolynomial") {
  for (const GrowthFunction g : {GrowthFunction::logarithmic(), GrowthFunction::iterated_log(1),
                                 GrowthFunction::iterated_log(2), GrowthFunction::iterated_log(3)}) {
    double prev = -1.0;
    for (double lt = -6; lt < 8; lt += 0.01) {
      const double t = std::pow(10.0, lt), h = 1e-3 * t;
      CHECK(g(t) >= prev);
      prev = g(t);
      CHECK(g(t + h) - 2 * g(t) + g(t - h) <= 1e-12 * std::max(1.0, g(t)));
      auto F = [&](double x) { return x * g(x); };
      CHECK(F(t + h) - 2 * F(t) + F(t - h) >= -1e-12 * std::max(1.0, F(t)));
    }
    // g(t) <= c (1 + t^0.05) with a finite c on the sampled range
    double c = 0.0;
    for (double lt = 0; lt < 8; lt += 0.1) c = std::max(c, g(std::pow(10.0, lt)) / (1 + std::pow(10.0, 0.05 * lt)));
    CHECK(std::isfinite(c));
  }
  CHECK(GrowthFunction::constant_one()(123.0) == 1.0);
}

TEST_CASE("iterated log composes log1p level + 1 times") {
  const GrowthFunction g = GrowthFunction::iterated_log(2);
  const double t = 5.0;
  CHECK(g(t) == doctest::Approx(std::log1p(std::log1p(std::log1p(t)))));
  CHECK(GrowthFunction::logarithmic()(t) == doctest::Approx(std::log1p(t)));
}

TEST_CASE("Hessian matches finite differences of the gradient") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lr(-1.0, 2.0), th(0.0, 6.283);
  for (const IntegrandSpec s : {log_spec(), [] {
                                  IntegrandSpec x;
                                  x.growth = GrowthFunction::iterated_log(2);
                                  x.mu = 1.2;
                                  return x;
                                }()}) {
    for (int k = 0; k < 100; ++k) {
      const auto z = vec(std::pow(10.0, lr(rng)), th(rng));
      const Matrix H = hess_L(s, z);
      CHECK((H - H.transpose()).norm() <= 1e-14 * H.norm());
      for (int j = 0; j < 2; ++j) {
        const double h = 1e-6 * std::max(1.0, std::hypot(z[0], z[1]));
        auto zp = z, zm = z;
        zp[j] += h;
        zm[j] -= h;
        const Vector fd = (grad_L(s, zp) - grad_L(s, zm)) / (2 * h);
        CHECK((fd - H.col(j)).norm() <= 1e-6 * std::max(1.0, H.norm()));
      }
    }
  }
}

TEST_CASE("origin: singular without smoothing, C2 with smoothing") {
  IntegrandSpec s = log_spec();
  const double z0[2] = {0.0, 0.0};
  CHECK_THROWS_AS(hess_H(s, {0.0, 1.0}, z0), SingularPoint);
  s.delta_moll = 1e-2;
  const Matrix H = hess_H(s, {0.0, 1.0}, z0);
  CHECK(std::isfinite(H(0, 0)));
  const double z[2] = {1e-7, 0.0};
  CHECK((hess_H(s, {0.0, 1.0}, z) - H).norm() <= 1e-6);
}

TEST_CASE("spec validation") {
  IntegrandSpec s = log_spec();
  s.q = 2.0;
  CHECK_THROWS_AS(s.validate(), InvalidConfig);
  s.q = 1.5;
  s.mu = 2.0;
  CHECK_THROWS_AS(s.validate(), InvalidConfig);
  IntegrandSpec area;
  area.kind = LKind::area;
  area.area_p = 2.0;
  area.mu = 3.0;
  CHECK_NOTHROW(area.validate());
  CHECK_FALSE(area.solver_admissible());
}

TEST_CASE("smallest Lambda satisfies the sandwich on its scan range") {
  IntegrandSpec s = log_spec();
  const double L = smallest_lambda(s).admissible();
  CHECK(L >= 1.0);
  CHECK(L < 10.0);
}
