#pragma once

#include <vector>

#include "types.hpp"

namespace zipfrac {

// Max preimage mismatch (relative to the axis length) at the interior nodes
// of one axis, for explicit affine map coefficients.
double axis_join_residual(const std::vector<double>& nodes,
                          const std::vector<double>& slopes,
                          const std::vector<double>& intercepts,
                          std::vector<double>* preimages = nullptr,
                          std::vector<double>* residuals = nullptr);

// Result of the interior-node join check: for every interior node x_{k,j}
// the preimages under the two adjacent maps must coincide.
struct JoinReport {
  bool ok = true;
  double max_residual = 0.0;  // relative to axis length
  // per axis, per interior node: the common preimage x* and the residual
  std::vector<std::vector<double>> preimages;
  std::vector<std::vector<double>> residuals;
};

// Cartesian partition with a one-bit-per-axis zipper signature and the
// derived signed affine cell maps.
//
// Axis k carries strictly increasing nodes x_{k,0} < ... < x_{k,N_k} with
// N_k >= 2 subintervals. Cell indices are 1-based (cell j spans
// [x_{j-1}, x_j]); node indices are 0-based. The map for cell j contracts
// the whole axis interval onto cell j, flipped or not according to the
// signature bit and the parity of j.
class Grid {
public:
  Grid(std::vector<std::vector<double>> nodes, std::vector<int> signature);

  int dims() const { return static_cast<int>(nodes_.size()); }
  int cells(int axis) const { return static_cast<int>(nodes_[axis].size()) - 1; }
  std::vector<int> cell_shape() const;
  std::int64_t cell_count() const;

  const std::vector<double>& nodes(int axis) const { return nodes_[axis]; }
  int signature(int axis) const { return signature_[axis]; }
  double lo(int axis) const { return nodes_[axis].front(); }
  double hi(int axis) const { return nodes_[axis].back(); }
  double length(int axis) const { return hi(axis) - lo(axis); }
  Box box() const;

  // Node index hit by cell j's map at an endpoint of the axis interval.
  // `endpoint` is a node index and must be 0 or N_k.
  static int tau(int j, int endpoint, int n_cells, int sig_bit);

  double slope(int axis, int j) const { return slope_[axis][j - 1]; }
  double intercept(int axis, int j) const { return intercept_[axis][j - 1]; }
  bool increasing(int axis, int j) const { return slope(axis, j) > 0.0; }

  double apply(int axis, int j, double x) const {
    return slope(axis, j) * x + intercept(axis, j);
  }
  double invert(int axis, int j, double x) const {
    return (x - intercept(axis, j)) / slope(axis, j);
  }

  // Componentwise image u_j(X) of a domain point / its preimage. invert()
  // requires X inside cell j's hyperrectangle.
  Point apply(const CellIndex& j, const Point& x) const;
  Point invert(const CellIndex& j, const Point& x) const;

  // Cell containing X. Ties at interior nodes resolve to the lower cell;
  // the last cell is closed.
  CellIndex locate(const Point& x) const;
  int locate(int axis, double x) const;

  JoinReport check_join() const;

  bool is_uniform(double rel_tol = 1e-12) const;

  void check_cell(const CellIndex& j) const;
  void check_point(const Point& x, double rel_tol = 1e-12) const;

private:
  std::vector<std::vector<double>> nodes_;
  std::vector<int> signature_;
  std::vector<std::vector<double>> slope_;
  std::vector<std::vector<double>> intercept_;
};

}  // namespace zipfrac
