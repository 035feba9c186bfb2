#include "dplab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <sstream>

namespace dplab {

namespace {

constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
constexpr const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"22\" font-size=\"15\">{}</text>\n",
      kW, kH, kLeft, escape(title));
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                           const std::vector<Series>& series, bool log_y) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  auto ty = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  }
  if (!(xmax > xmin)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymax > ymin)) { ymin -= 0.5; ymax += 0.5; }
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + ph - (ty(y) - ymin) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os << header(title);
  os << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                    kTop, pw, ph);
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4, yv = ymin + (ymax - ymin) * t / 4;
    const double X = kLeft + pw * t / 4, Y = kTop + ph - ph * t / 4;
    os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", X, kTop + ph + 16, xv);
    os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6, Y + 4,
                      log_y ? fmt::format("1e{:.2g}", yv) : fmt::format("{:.3g}", yv));
  }
  os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2, kH - 12,
                    escape(xlabel));
  os << fmt::format("<text x=\"16\" y=\"{:.1f}\" transform=\"rotate(-90 16 {:.1f})\" text-anchor=\"middle\">{}</text>\n",
                    kTop + ph / 2, kTop + ph / 2, escape(ylabel));
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = kColours[k % std::size(kColours)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      pts += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
      os << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(s.x[i]), py(s.y[i]), col);
    }
    os << fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", pts, col);
    os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" fill=\"{}\">{}</text>\n", kW - kRight + 10,
                      kTop + 16 * (k + 1), col, escape(s.name));
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values) {
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) vmax = 1.0;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  const double bw = pw / std::max<std::size_t>(1, values.size());
  std::ostringstream os;
  os << header(title);
  os << fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", kLeft, kTop + ph,
                    kLeft + pw, kTop + ph);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double h = std::abs(values[i]) / vmax * ph;
    const double x = kLeft + bw * i + 0.15 * bw;
    os << fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n", x,
                      kTop + ph - h, 0.7 * bw, h, values[i] < 0 ? "#d62728" : "#1f77b4");
    os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", x + 0.35 * bw,
                      kTop + ph + 16, escape(i < labels.size() ? labels[i] : ""));
    os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.4g}</text>\n", x + 0.35 * bw,
                      kTop + ph - h - 4, values[i]);
  }
  os << "</svg>\n";
  return os.str();
}

std::string energy_plot(const SweepReport& report) {
  std::vector<Series> s;
  for (const auto& c : report.cells) {
    Series ser{c.cell.label, {}, {}};
    for (std::size_t k = 0; k < c.levels.size(); ++k) {
      ser.x.push_back(static_cast<double>(k));
      ser.y.push_back(c.levels[k].energy);
    }
    s.push_back(std::move(ser));
  }
  return svg_line_chart("Discrete energy per refinement level", "level", "energy", s);
}

std::string gradient_growth_plot(const SweepReport& report) {
  std::vector<Series> s;
  for (const auto& c : report.cells) {
    Series ser{c.cell.label, {}, {}};
    for (std::size_t k = 0; k < c.levels.size(); ++k) {
      ser.x.push_back(static_cast<double>(k));
      ser.y.push_back(c.levels[k].max_grad);
    }
    s.push_back(std::move(ser));
  }
  return svg_line_chart("Interior max |Du| per refinement level", "level", "max |Du|", s, true);
}

std::string gap_plot(const GapCertificate& cert) {
  return svg_bar_chart(cert.valid ? "Energy gap certificate (VALID)" : "Energy gap certificate (INVALID)",
                       {"H(u0)", "H*(sz)", "m s / 2", "I_inf lower", "gap"},
                       {cert.I1_upper.value, cert.Hstar.value, cert.threshold, cert.I_inf_lower, cert.gap});
}

std::string blowup_plot(const BlowupTable& table) {
  std::vector<Series> s;
  for (const auto& r : table.competitor) {
    Series ser{fmt::format("p = {:.3g}", r.p), {}, {}};
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      ser.x.push_back(table.levels[i]);
      ser.y.push_back(r.values[i]);
    }
    s.push_back(std::move(ser));
  }
  return svg_line_chart("Competitor gradient integrals", "grading level", "integral of |Du|^p", s, true);
}

std::string csv_schema() {
  return R"(# CSV schema

## sweep.csv
one row per (cell, refinement level)
- cell: label of the sweep cell
- q, alpha, mu, s: integrand parameters
- fractal: 1 when the coefficient is built on the Cantor set
- data_scale: multiplier applied to the boundary datum
- nodes: grid nodes per axis
- max_grad: max |Du| over cells inside (-1/2,1/2)^2
- energy: discrete energy of the computed minimiser
- iterations, converged: solver statistics
- ratio: max_grad divided by the previous level's max_grad (empty on the first level)
- grad_int_i: integral of |Du|^p over (-7/8,7/8)^2 for the i-th probe exponent
- flagged: 1 when the cell failed

## blowup.csv
- source: competitor (semi-analytic) or solved (discrete minimiser)
- p: probe exponent
- index: position in the level list
- level: grading level k (competitor only; the layer |x_2| < 2^-k is excluded)
- value: integral of |Du|^p over (-7/8,7/8)^2
- growth: value divided by the previous value

## approx.csv
- eps: mollification radius
- min_margin: min over nodes of the constructed function minus the obstacle
- sup_norm: sup norm of the constructed function
- bound: 4 max(sup |w|, sup |psi|)
- modular: G of the difference to w

## family.csv
- eps, delta: regularisation parameters
- sigma: coefficient shift
- energy: regularised energy of the minimiser
- iterations, converged: solver statistics
)";
}

}  // namespace dplab
