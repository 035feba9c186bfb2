#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dplab/fractal.hpp"
#include "dplab/grid.hpp"
#include "dplab/solver.hpp"

namespace dplab {

// Quadrature value with an error bar; `tail` is the analytic bound for the
// layer |x_n| < h0 and is already included in `value`.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
  double tail = 0.0;
  double upper() const { return value + error; }
  double lower() const { return value - error; }
};

struct QuadratureOptions {
  int grading_levels = 12;  // main part covers 2^{-levels} <= |x_n| <= 1
  int gauss_order = 6;
  int panels_per_level = 4;
};

// Semi-analytic quadrature on Q = (-1,1)^2 for the counterexample fields.
// Error bars compare the given resolution against a halved one.
class FractalQuadrature {
 public:
  FractalQuadrature(const Counterexample& ce, QuadratureOptions options);

  Estimate pairing() const;                 // int <D u~, z>
  Estimate pairing_with(const std::function<Vector(std::span<const double>)>& grad_w,
                        const Box& support) const;
  Estimate energy_u0(double m) const;       // H(m u_*; Q)
  Estimate modular_u0(double m) const;      // G(m u_*; Q)
  Estimate gradient_power(double p) const;  // int |D u_*|^p
  // |x_n| in [h_lo, h_hi]; `outer` is the x-bar margin beyond [-1/2, 1/2].
  Estimate gradient_power_between(double p, double h_lo, double h_hi, double outer = 0.5) const;
  // Same plus the layer |x_n| < h_lo from self-similarity of the limit set;
  // for p >= 1 + eps the layer diverges, `tail` is +inf and `value` stays truncated.
  Estimate gradient_power_layered(double p, double h_lo, double h_hi, double outer = 0.5) const;
  Estimate conjugate_energy(double sigma) const;  // H^*(sigma z; Q)
  Estimate power_conjugate_z() const;       // int (a|.|^q)^*(z)
  Estimate power_conjugate_b() const;       // int (a|.|^q)^*(b)
  double chain_bound(double sigma) const;   // int (a|.|^q)^*(sigma C_z b) incl. tail
  double coefficient_integral() const;      // int a
  double z_bound_constant() const;          // |z| <= C_z b
  double h0() const;

 private:
  const Counterexample& ce_;
  QuadratureOptions opt_;
};

struct CertificateOptions {
  QuadratureOptions quadrature{};
  bool discrete_check = false;
  int discrete_nodes = 33;
  double required_margin = 0.10;
};

struct DiscreteCrossCheck {
  int nodes = 0;
  double energy = 0.0;
  bool converged = false;
  bool below_upper = false;
  bool below_lower = false;
};

struct GapCertificate {
  CounterexampleConfig config;
  Estimate pairing_raw;
  Estimate pairing_next_depth;
  double rescale_factor = 1.0;
  Estimate I1_upper;
  Estimate Hstar;
  double chain_bound = 0.0;
  double threshold = 0.0;  // m_* sigma_* / 2
  double I_inf_lower = 0.0;
  double gap = 0.0;
  double gap_lower = 0.0;  // gap minus error bars
  double slack_bound = 0.0;  // 3 sigma m / 8 + H(u0)
  double margin = 0.0;     // 1 - (I1 + H*) / threshold, using upper bounds
  bool inequality_67 = false;
  bool inequality_68 = false;
  bool valid = false;
  std::string reason;
  std::optional<DiscreteCrossCheck> discrete;
};

CounterexampleConfig select_parameters(CounterexampleConfig draft, double kappa, const QuadratureOptions& options);
GapCertificate lavrentiev_certificate(const CounterexampleConfig& config, const CertificateOptions& options = {});
std::string to_json(const GapCertificate& cert);

struct SweepCell {
  std::string label;
  double q = 1.3;
  double alpha = 0.5;
  double mu = 1.0;
  double s = 1.0;
  bool fractal = false;
  double data_scale = 1.0;
};

struct SweepLevel {
  int nodes = 0;
  double max_grad = 0.0;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> gradient_integrals;  // one per probe exponent
};

struct SweepCellReport {
  SweepCell cell;
  std::vector<SweepLevel> levels;
  std::vector<double> ratios;  // max_grad[k+1] / max_grad[k]
  bool flagged = false;
  std::string note;
};

struct SweepOptions {
  std::vector<int> nodes{33, 65, 129};
  std::vector<double> probes{1.0, 1.075, 1.3};
  SolverOptions solver{};
  double delta = 1e-3;
  int cantor_depth = 10;
  double eps = 0.15;
};

struct SweepReport {
  std::vector<SweepCellReport> cells;
  // (lip.0)-shape fit on the data-scaling pair: log max|Du| vs log energy
  double fit_slope = 0.0;
  double fit_r2 = 0.0;
};

SweepCellReport run_sweep_cell(const SweepCell& cell, const SweepOptions& options);
SweepReport regularity_sweep(const std::vector<SweepCell>& cells, const SweepOptions& options);
std::vector<SweepCell> default_sweep_cells();

struct BlowupRow {
  double p = 1.0;
  std::vector<double> values;  // per grading level or per grid level
  std::vector<double> growth;  // successive ratios
};

struct BlowupTable {
  std::vector<int> levels;
  std::vector<BlowupRow> competitor;  // explicit u_*, semi-analytic
  std::vector<BlowupRow> solved;      // discrete minimisers on refining grids
  double onset_low = 0.0;
  double onset_high = 0.0;
};

// Competitor integrals over Q' = (-7/8,7/8)^2 with grading levels k0..k1: complete
// where finite, truncated at 2^{-k} where the layer below diverges.
BlowupTable sobolev_blowup_diagnostic(const CounterexampleConfig& config, const std::vector<double>& probes,
                                      int level_lo, int level_hi, const SweepOptions* solved = nullptr);

struct ApproximationRow {
  double eps = 0.0;
  double min_margin = 0.0;  // min(w~ - psi)
  double sup_norm = 0.0;
  double bound = 0.0;       // 4 max(|w|, |psi|)
  double modular = 0.0;     // G(w~ - w)
};

std::vector<ApproximationRow> approximation_convergence(const GridFunction& w, const GridFunction& psi,
                                                        const std::vector<double>& eps_list,
                                                        const IntegrandSpec& spec, const CoefficientField& a,
                                                        double theta_exp = 1.0);

std::string to_csv(const SweepReport& report);
std::string to_csv(const BlowupTable& table);
std::string to_csv(const std::vector<ApproximationRow>& rows);
std::string to_csv(const std::vector<FamilyEntry>& rows);

}  // namespace dplab
