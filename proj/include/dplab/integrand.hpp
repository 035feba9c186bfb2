#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>

namespace dplab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Jet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

enum class GrowthKind { constant_one, log, iterated_log };

// g(t) in L(z) = |z| g(|z|).  iterated_log of level i composes log1p i+1 times,
// so level 1 is log(1 + log(1 + t)).
struct GrowthFunction {
  GrowthKind kind = GrowthKind::log;
  int level = 1;

  static GrowthFunction constant_one() { return {GrowthKind::constant_one, 0}; }
  static GrowthFunction logarithmic() { return {GrowthKind::log, 0}; }
  static GrowthFunction iterated_log(int level) { return {GrowthKind::iterated_log, level}; }

  int compositions() const;
  double operator()(double t) const;
  Jet jet(double t) const;
  bool unbounded() const { return kind != GrowthKind::constant_one; }
  // Smallest t with g(t) >= 1; +inf for the constant kind is never needed (g == 1).
  double threshold() const;
};

enum class LKind { product, area };

struct IntegrandSpec {
  GrowthFunction growth{};
  LKind kind = LKind::product;
  double area_p = 2.0;
  double mu = 1.0;
  double q = 1.5;
  double s = 0.0;
  double lambda = 1.0;
  double delta_moll = 0.0;

  // Throws InvalidConfig.  Area-type specs carry mu = p + 1 and are accepted
  // here; solver_admissible() is the stricter gate.
  void validate() const;
  bool solver_admissible() const;
  // Smoothing radius used in the q-term: s when positive, otherwise delta_moll.
  double q_shift() const { return s > 0.0 ? s : delta_moll; }
};

struct CoefficientSample {
  double a = 0.0;
  double alpha = 1.0;
};

// Radial profile of L_delta: L(z) = F(l_delta(|z|)).
Jet profile_F(const IntegrandSpec& spec, double t);
// Radial profile t -> H(x, t e) with its first two derivatives in t.
Jet profile_H(const IntegrandSpec& spec, double a, double t);

double eval_L(const IntegrandSpec& spec, std::span<const double> z);
Vector grad_L(const IntegrandSpec& spec, std::span<const double> z);
Matrix hess_L(const IntegrandSpec& spec, std::span<const double> z);

double eval_H(const IntegrandSpec& spec, CoefficientSample a, std::span<const double> z);
Vector grad_H(const IntegrandSpec& spec, CoefficientSample a, std::span<const double> z);
Matrix hess_H(const IntegrandSpec& spec, CoefficientSample a, std::span<const double> z);

double eval_modular_G(const IntegrandSpec& spec, CoefficientSample a, std::span<const double> z);
double eval_E_star(const IntegrandSpec& spec, CoefficientSample a, double t);
// Smallest t beyond which t <= 2 E_*(t)^{1/(2-mu)}, worst case a = 0.
double threshold_T_mu(const IntegrandSpec& spec);

double sup_slope_L(const IntegrandSpec& spec);
double conjugate_H(const IntegrandSpec& spec, CoefficientSample a, std::span<const double> w,
                   double radial_tol = 1e-10);
// Radial version: sup_t { r t - H(x, t) } together with the maximiser.
struct ConjugateResult {
  double value = 0.0;
  double argmax = 0.0;
};
ConjugateResult conjugate_radial(const IntegrandSpec& spec, double a, double r,
                                 double radial_tol = 1e-10);
// Closed form of (c |.|^q)^* at |w| = r.
double power_conjugate(double c, double q, double r);

Vector V_sp(double s, double p, std::span<const double> z);

struct LambdaReport {
  double sandwich_growth = 1.0;  // (1/L) t g <= L <= L t g + L
  double lower_eig = 1.0;
  double upper_hess = 1.0;
  double admissible() const;
};
// Smallest Lambda satisfying each part of the ellipticity conditions on a
// log-spaced radial scan of [t_min, t_max].
LambdaReport smallest_lambda(const IntegrandSpec& spec, double t_min = 1e-6, double t_max = 1e8,
                             int samples = 20000);

inline double norm(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return std::sqrt(s);
}

}  // namespace dplab
