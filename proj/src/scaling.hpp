#pragma once

#include <functional>
#include <memory>
#include <string>

#include "grid.hpp"
#include "types.hpp"

namespace zipfrac {

// Vertical scaling family alpha_j(X). Either one global constant or the
// pullback alpha_j(X) = a(u_j(X)) of a continuous global function; both make
// the cross-cell matching condition hold by construction. Raw per-cell
// constants are rejected where configs are parsed (adjacent cells would need
// equal constants anyway, collapsing to a single global one).
class ScalingField {
public:
  enum class Mode { GlobalConstant, Pullback };

  static ScalingField constant(double c);
  // `declared_bound` is the analytic sup bound of |fn|; must be < 1. A
  // sampled sup check (65 points per axis) runs against `grid`'s box.
  static ScalingField pullback(std::function<double(const Point&)> fn,
                               std::string label, double declared_bound,
                               const Grid& grid);

  // Multilinear blend of per-node values over the partition.
  static ScalingField node_blend(const Grid& grid,
                                 std::vector<double> node_values);
  // Per-cell plateau blend: constant `cell_values[j]` deep inside each cell
  // image, linear ramps of relative width (1-plateau) around the interior
  // nodes. plateau in [0,1).
  static ScalingField cell_blend(const Grid& grid,
                                 std::vector<double> cell_values,
                                 double plateau);

  Mode mode() const { return mode_; }
  const std::string& label() const { return label_; }
  double constant_value() const;

  // alpha_j(X) for X anywhere in the domain.
  double alpha(const Grid& grid, const CellIndex& j, const Point& x) const;

  // Sampled sup |alpha| over all cells; equals |c| in constant mode.
  double sup_abs(const Grid& grid, int grid_per_axis = 65) const;
  // Sampled {min, max} of alpha_j over one cell.
  std::pair<double, double> cell_range(const Grid& grid, const CellIndex& j,
                                       int grid_per_axis) const;
  // Sampled sup of |alpha_j| over one cell.
  double cell_sup_abs(const Grid& grid, const CellIndex& j,
                      int grid_per_axis) const;

private:
  ScalingField() = default;

  Mode mode_ = Mode::GlobalConstant;
  double constant_ = 0.0;
  std::function<double(const Point&)> global_fn_;
  double declared_bound_ = 0.0;
  std::string label_;
};

}  // namespace zipfrac
