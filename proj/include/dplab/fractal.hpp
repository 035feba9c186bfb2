#pragma once

#include <span>
#include <string>
#include <vector>

#include "dplab/integrand.hpp"

namespace dplab {

struct CantorParams {
  int n = 2;
  double eps = 0.15;
  int depth = 10;

  double lambda() const;
  double target_dimension() const { return n - 1 - eps; }
  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
};

// Depth-J union of intervals along one axis; the set in R^{n-1} is the
// product of n-1 copies.
class CantorApprox {
 public:
  CantorApprox() = default;
  explicit CantorApprox(const CantorParams& params);

  const CantorParams& params() const { return params_; }
  int depth() const { return params_.depth; }
  double lambda() const { return lambda_; }
  // l_i = lambda^i for i = 0..J
  double length(int level) const;
  // Gap between sibling intervals created at `level` (1..J): l_{i-1} - 2 l_i.
  double gap(int level) const;
  std::span<const Interval> intervals() const { return intervals_; }
  std::vector<Interval> level_intervals(int level) const;

  double distance_1d(double x) const;
  // Exact for n = 2, sup-norm product distance for n = 3.
  double distance(std::span<const double> xbar) const;
  // Unit-slope direction of the 1-D distance (0 inside the set).
  double distance_slope_1d(double x) const;

  // Number of half-open boxes of side l_k (aligned at -1/2) meeting the set.
  std::vector<long long> box_counts(int k_min, int k_max) const;
  double box_counting_slope(int k_min, int k_max) const;

 private:
  CantorParams params_{};
  double lambda_ = 0.0;
  std::vector<Interval> intervals_;
};

struct Atom {
  std::vector<double> point;
  double weight = 0.0;
};

class CantorMeasureApprox {
 public:
  CantorMeasureApprox() = default;
  explicit CantorMeasureApprox(const CantorApprox& approx);

  int level() const { return level_; }
  int dim() const { return dim_; }
  std::size_t size() const;
  double weight() const { return weight_; }
  double total_mass() const { return weight_ * static_cast<double>(size()); }
  std::span<const double> centers_1d() const { return centers_; }
  std::vector<Atom> atoms() const;

 private:
  int level_ = 0;
  int dim_ = 1;
  double weight_ = 0.0;
  std::vector<double> centers_;
};

struct CantorBuild {
  CantorApprox approx;
  CantorMeasureApprox measure;
};
CantorBuild build_cantor(const CantorParams& params);

struct CounterexampleConfig {
  CantorParams cantor{};
  double alpha = 0.5;
  double q = 1.8;
  double m_star = 1.0;
  double sigma_star = 1.0;
  double kappa = 0.5;
  IntegrandSpec integrand{};
  // constants entering the parameter selection
  double lambda_used = 1.0;
  double c_tilde = 1.0;
  double c_lower = 0.0;  // c_*: conjugate-side constant
  double c_upper = 0.0;  // c^*: energy-side constant
  double delta_exponent = 0.0;
  double z_scale = 1.0;  // rescaling applied to the dual field
  double pairing = 0.0;

  double q_conj() const { return q / (q - 1.0); }
  // Throws InvalidConfig on q <= 1 + alpha or eps outside (0, q - 1 - alpha).
  void validate() const;
};

struct CutoffValues {
  double chi_star = 0.0;
  double chi_a = 0.0;
  Vector grad_chi_star;
  Vector grad_chi_a;
};

// Gradient bounds |D chi| <= C / |x_n| for the cubic ramps used here.
inline constexpr double kChiStarGradConst = 3.0924;  // 0.75 * sqrt(17)
inline constexpr double kChiAGradConst = 2.2361;     // sqrt(5)

// Counterexample fields on Q = (-1,1)^n built on a depth-J Cantor set.
class Counterexample {
 public:
  Counterexample(CounterexampleConfig config, CantorBuild build);
  explicit Counterexample(const CounterexampleConfig& config);

  const CounterexampleConfig& config() const { return config_; }
  CounterexampleConfig& config() { return config_; }
  const CantorApprox& cantor() const { return build_.approx; }
  const CantorMeasureApprox& measure() const { return build_.measure; }
  int dim() const { return config_.cantor.n; }

  double dist(std::span<const double> x) const;
  CutoffValues cutoffs(std::span<const double> x) const;

  double phi(std::span<const double> x) const;
  Vector grad_phi(std::span<const double> x) const;

  double u_star(std::span<const double> x) const;
  Vector grad_u_star(std::span<const double> x) const;
  double u_tilde(std::span<const double> x) const;
  Vector grad_u_tilde(std::span<const double> x) const;
  double u0(std::span<const double> x) const { return config_.m_star * u_star(x); }
  double u0_tilde(std::span<const double> x) const { return config_.m_star * u_tilde(x); }

  double coefficient_a(std::span<const double> x) const;
  double weight_b(std::span<const double> x) const;

  // z = div Z with Z the measure-convolved antisymmetric field, times z_scale.
  Vector dual_z(std::span<const double> x) const;
  // Unscaled n = 2 evaluation; returns (z_1, z_2).
  std::pair<double, double> dual_z_2d(double x1, double x2) const;

  // 1 / |unit sphere of R^{n-1}|
  double sphere_normalisation() const;

 private:
  void prepare();

  CounterexampleConfig config_;
  CantorBuild build_;
  // prefix sums of w a^k over sorted 1-D atom centres (n = 2)
  std::vector<double> prefix_[4];
};

// Smallest power-of-two m_* making both selection inequalities hold with
// quadrature constants; fills the certificate-facing fields of the config.
CounterexampleConfig select_parameters(CounterexampleConfig draft, double kappa);

std::string to_text(const CantorApprox& approx);
std::string to_text(const CounterexampleConfig& config);

}  // namespace dplab
