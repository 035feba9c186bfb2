#pragma once

#include <string>
#include <vector>

#include "dplab/experiments.hpp"

namespace dplab {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

// Standalone SVG documents.
std::string svg_line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                           const std::vector<Series>& series, bool log_y = false);
std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values);

std::string energy_plot(const SweepReport& report);
std::string gradient_growth_plot(const SweepReport& report);
std::string gap_plot(const GapCertificate& cert);
std::string blowup_plot(const BlowupTable& table);

// Column documentation for every CSV the tools emit.
std::string csv_schema();

}  // namespace dplab
