#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dplab {

enum ExitCode : int { kOk = 0, kInvalidConfig = 2, kInvalidCertificate = 3, kNotConverged = 4 };

// Fully resolved run configuration; serialised beside every output.
struct RunConfig {
  std::string subcommand;
  // integrand
  std::string growth = "log";  // log | iterated-log | constant-one
  int growth_level = 1;
  double q = 1.8;
  double mu = 1.0;
  double s = 1.0;
  double alpha = 0.5;
  // fractal
  double eps = 0.15;
  int depth = 10;
  double kappa = 0.5;
  int quad_levels = 12;
  // grid
  int nodes = 33;
  int grading_levels = 0;
  double obstacle = -1.0;  // constant obstacle level; <= -1e300 disables
  // schedule
  double eps0 = 0.25;
  double eps_min = 1.0 / 64.0;
  double delta0 = 1e-2;
  double delta_min = 1e-6;
  int max_iter = 50000;
  // experiments
  std::vector<int> levels{33, 65, 129};
  std::vector<double> probes{1.0, 1.075, 1.3};
  int blowup_lo = 4;
  int blowup_hi = 12;
  bool solve_blowup = false;
  bool discrete_check = false;
  std::string output = "out";
  std::uint64_t seed = 1;
};

std::string to_json(const RunConfig& c);
RunConfig run_config_from_json(const std::string& text);

// Entry point of the command-line tool.
int run(int argc, char** argv);

}  // namespace dplab
