#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dplab/grid.hpp"
#include "dplab/integrand.hpp"

namespace dplab {

using CoefficientField = std::function<double(std::span<const double>)>;

struct ObstacleProblem {
  GridPtr grid;
  IntegrandSpec integrand{};
  CoefficientField a = [](std::span<const double>) { return 0.0; };
  double alpha = 1.0;
  double a_star = 0.0;  // constant added to a
  std::optional<GridFunction> obstacle;
  GridFunction boundary;  // full nodal field; only boundary nodes are binding

  void validate() const;
  std::vector<double> cell_coefficients() const;
};

struct SolverOptions {
  int max_iter = 50000;
  int window = 50;
  double rel_decrease = 1e-10;
  double pg_tol = 1e-8;
  Execution execution = Execution::parallel;
};

// Paired (eps, delta) entries; delta is broadcast when shorter.
struct RegularizationSchedule {
  std::vector<double> eps;
  std::vector<double> delta;
  SolverOptions options{};

  static RegularizationSchedule geometric(double eps0, double eps_min, double delta0, double delta_min);
  void validate() const;
  std::size_t size() const { return eps.size(); }
  double delta_at(std::size_t k) const;
};

// Coefficient shift of the eps-regularised problem.
double sigma_eps(double eps, double du0_q_norm_q);

struct EnergyBreakdown {
  double total = 0.0;
  double l_part = 0.0;
  double q_part = 0.0;
};

// Discrete energy sum_c |c| * [L_delta(Du_c) + (a_c + shift) l(Du_c)^q].
class DiscreteEnergy {
 public:
  DiscreteEnergy(const ObstacleProblem& problem, IntegrandSpec spec, double coefficient_shift);

  const IntegrandSpec& spec() const { return spec_; }
  double value(const GridFunction& w, Execution ex = Execution::parallel) const;
  // Returns the energy and writes d E / d w_k into grad (all nodes).
  double value_and_gradient(const GridFunction& w, std::span<double> grad,
                            Execution ex = Execution::parallel) const;
  EnergyBreakdown breakdown(const GridFunction& w) const;
  std::span<const double> coefficients() const { return coef_; }

 private:
  GridPtr grid_;
  IntegrandSpec spec_;
  std::vector<double> coef_;
  std::vector<double> volume_;
  std::vector<std::size_t> corners_;
  std::vector<double> inv_spacing_;
};

struct SolveReport {
  double energy = 0.0;
  int iterations = 0;
  double pg_norm = 0.0;
  double max_grad_interior = 0.0;
  double max_principle_margin = 0.0;
  double feasibility_margin = 0.0;
  bool converged = false;
  std::vector<double> energy_history;
};

struct SolveResult {
  GridFunction u;
  SolveReport report;
};

// Single solve at fixed smoothing and coefficient shift.
SolveResult minimize(const ObstacleProblem& problem, const IntegrandSpec& spec, double coefficient_shift,
                     const SolverOptions& options, const GridFunction* initial = nullptr);
// Runs the schedule warm-started; returns the innermost solution.
SolveResult solve(const ObstacleProblem& problem, const RegularizationSchedule& schedule);

struct FamilyEntry {
  double eps = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
};
std::vector<FamilyEntry> regularized_family(const ObstacleProblem& problem, const RegularizationSchedule& schedule,
                                            GridFunction* final_solution = nullptr);

EnergyBreakdown energy(const ObstacleProblem& problem, const GridFunction& w);
// Projected gradient norm of E at w over free nodes.
double projected_gradient_norm(const ObstacleProblem& problem, const GridFunction& w, std::span<const double> grad);
double max_gradient_in(const GridFunction& w, const Box& box);

std::string to_json(const SolveReport& report);

}  // namespace dplab
