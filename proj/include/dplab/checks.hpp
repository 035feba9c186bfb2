#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dplab {

struct CheckResult {
  std::string name;
  long samples = 0;
  long violations = 0;
  double worst = 0.0;  // largest relative violation seen (<= 0 when none)
  bool passed() const { return violations == 0; }
};

// Randomised pointwise checks of the integrand family: sandwich bounds,
// Hessian eigenvalue bounds, Fenchel-Young, V_{s,p} comparability and
// monotonicity of t |t|^{p-1}.
std::vector<CheckResult> ellipticity_suite(std::uint64_t seed, int samples = 10000, double slack = 1e-8);

// Cantor interval invariants, grid round trips and a small solver instance.
std::vector<CheckResult> structural_suite(std::uint64_t seed);

// Comparability constant used for |V(z1) - V(z2)| against
// (s^2 + |z1|^2 + |z2|^2)^{(p-2)/4} |z1 - z2|.
double v_comparability_constant(double p);

}  // namespace dplab
