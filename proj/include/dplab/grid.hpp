#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dplab/integrand.hpp"

namespace dplab {

enum class Execution { serial, parallel };

// Extra nodes at +-h * ratio^k (k = 1..levels) inside the two cells adjacent
// to x_n = 0, h being the uniform spacing.
struct Grading {
  double ratio = 0.5;
  int levels = 0;
};

// Tensor grid on [-1,1]^n.  Node index is row-major (last axis fastest).
class Grid {
 public:
  Grid(int n, int nodes_per_axis, Grading grading = {});
  Grid(int n, std::vector<int> nodes, Grading grading = {});

  int dim() const { return n_; }
  int nodes(int axis) const { return static_cast<int>(coords_[axis].size()); }
  int cells(int axis) const { return nodes(axis) - 1; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_cells() const { return num_cells_; }
  std::span<const double> coords(int axis) const { return coords_[axis]; }
  const Grading& grading() const { return grading_; }
  bool uniform() const { return grading_.levels == 0; }
  double spacing(int axis, int i) const { return coords_[axis][i + 1] - coords_[axis][i]; }
  double min_spacing() const;

  std::size_t node_index(std::span<const int> idx) const;
  void node_multi(std::size_t k, std::span<int> idx) const;
  std::size_t cell_index(std::span<const int> idx) const;
  void cell_multi(std::size_t c, std::span<int> idx) const;

  Vector node_point(std::size_t k) const;
  Vector cell_center(std::size_t c) const;
  double cell_volume(std::size_t c) const;
  // Half the sum of adjacent cell volumes per axis (lumped nodal volume).
  double node_volume(std::size_t k) const;
  bool is_boundary(std::size_t k) const;
  // Node indices of the 2^n corners of a cell, corner bit k = offset along axis k.
  void cell_corners(std::size_t c, std::span<std::size_t> out) const;

 private:
  int n_ = 2;
  Grading grading_{};
  std::vector<std::vector<double>> coords_;
  std::vector<std::size_t> node_stride_, cell_stride_;
  std::size_t num_nodes_ = 0, num_cells_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(GridPtr grid, double fill = 0.0);
  GridFunction(GridPtr grid, const std::function<double(std::span<const double>)>& f);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::size_t size() const { return values_.size(); }
  double max_abs() const;
  double min() const;
  double max() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

// Cellwise scalar field.
struct CellField {
  GridPtr grid;
  std::vector<double> values;
};

// Cellwise n-vector field stored cell-major.
struct CellVectorField {
  GridPtr grid;
  int n = 2;
  std::vector<double> values;
  std::span<const double> at(std::size_t c) const { return {values.data() + c * n, static_cast<std::size_t>(n)}; }
  double norm_at(std::size_t c) const { return norm(at(c)); }
};

// Axis-aligned box [lo, hi].
struct Box {
  std::vector<double> lo, hi;
  static Box cube(int n, double half);
  bool contains(std::span<const double> x) const;
};

CellVectorField gradient(const GridFunction& w, Execution ex = Execution::parallel);
// Cell-volume weighted compensated sum; ordered block reduction.
double integrate(const CellField& density, Execution ex = Execution::parallel);
double integrate_over(const CellField& density, const Box& box);
CellField map_cells(const GridPtr& grid, const std::function<double(std::size_t)>& f);

// Difference on the node box where both w(x) and w(x + h) exist.
struct DifferenceField {
  GridFunction values;  // zero outside the overlap
  std::vector<int> lo, hi;  // node index range [lo, hi) of the overlap
  bool inside(std::span<const int> idx) const;
};
DifferenceField tau_h(const GridFunction& w, std::span<const int> shift);
DifferenceField tau2_h(const GridFunction& w, std::span<const int> shift);

struct SeminormValue {
  double value = 0.0;
  double tail_bound = 0.0;  // analytic bound on the omitted far field
};
SeminormValue gagliardo_seminorm(const GridFunction& w, double alpha0, double p, const Box& sub,
                                 double cutoff = 0.5);
double nikolskii_seminorm(const GridFunction& w, double alpha0, double p, const Box& sub, int K = 4);

struct WolffValue {
  double value = 0.0;
  int shells = 0;
  // Hoelder bound constant: value <= holder_constant * ||f||_{L^m}^theta
  double holder_constant = 0.0;
};
WolffValue wolff_potential(const CellField& f, std::span<const double> x0, double r, double sigma,
                           double theta, double m = 0.0);

// Truncate at +-eps^{-theta_exp}, then convolve with a normalised bump of radius eps.
GridFunction mollify_truncate(const GridFunction& w, double eps, double theta_exp);
// Convolution only (shared by the approximation scheme).
GridFunction mollify(const GridFunction& w, double eps);

void write_csv(std::ostream& os, const GridFunction& w);
GridFunction read_csv(std::istream& is, GridPtr grid);
// Header: magic "DPLG", u32 version, u32 n, u32 counts[n], f64 ratio, u32 levels,
// then f64 payload in row-major node order.
void write_binary(std::ostream& os, const GridFunction& w);
GridFunction read_binary(std::istream& is);

}  // namespace dplab
