#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "bernstein.hpp"
#include "germ.hpp"
#include "grid.hpp"
#include "scaling.hpp"
#include "types.hpp"

namespace zipfrac {

// Base function subtracted inside the vertical maps. Must agree with the
// germ at the 2^m domain corners.
struct BaseFunction {
  enum class Kind { Bernstein, User };

  static BaseFunction bernstein(std::shared_ptr<const BernsteinSpec> spec);
  static BaseFunction user(std::shared_ptr<const GermFunction> fn);

  Kind kind = Kind::Bernstein;
  std::shared_ptr<const BernsteinSpec> bernstein_spec;
  std::shared_ptr<const GermFunction> user_fn;

  double eval(const Point& x) const;
  const std::vector<int>* degrees() const;
  // Holder exponent: user bases carry their own; a Bernstein base inherits
  // the germ's.
  std::optional<double> holder_exponent() const;
};

struct QueryResult {
  double value = 0.0;
  double error_bound = 0.0;
};

constexpr std::int64_t kDefaultValueBudget = std::int64_t(1) << 24;

// Exact values of the fractal function on the level-r self-similar
// refinement grid, produced by running the self-referential recursion level
// by level from the germ values at the partition nodes. Immutable once built
// (the corrupt() diagnostics hook aside).
class FractalSurface {
public:
  FractalSurface(std::shared_ptr<const Grid> grid, ScalingField alpha,
                 std::shared_ptr<const GermFunction> germ, BaseFunction base,
                 int level, std::int64_t budget = kDefaultValueBudget);

  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  const ScalingField& alpha() const { return alpha_; }
  const GermFunction& germ() const { return *germ_; }
  const BaseFunction& base() const { return base_; }
  int level() const { return level_; }

  const std::vector<double>& axis_nodes(int axis) const { return axes_[axis]; }
  const std::vector<int>& shape() const { return shape_; }
  const std::vector<double>& values() const { return values_; }
  double value_at(const std::vector<int>& idx) const {
    return values_[flat_index(idx, shape_)];
  }
  // Value at a partition node (original node indices, 0-based per axis).
  double node_value(const std::vector<int>& node_idx) const;
  Point point_at(const std::vector<int>& idx) const;

  // Worst disagreement between the redundant computations of shared cell
  // boundary points during the build.
  double boundary_discrepancy() const { return boundary_discrepancy_; }
  double sup_alpha() const { return sup_alpha_; }

  // Max self-referential residual over sampled (parent, cell) pairs;
  // samples <= 0 sweeps every pair.
  double residual_check(std::int64_t samples, unsigned seed) const;

  // Sampled sup |surface - g| over the stored grid.
  double sup_vs(const GermFunction& g) const;
  // Min of g - surface over the stored grid (negative when the surface pokes
  // above g somewhere).
  double min_germ_minus(const GermFunction& g) const;

  // Point query by depth-d descent seeded with the germ.
  QueryResult query(const Point& x, int depth,
                    int bound_grid_per_axis = 65) const;

  double perturbation_bound(int grid_per_axis = 65) const;

  void write_csv(const std::string& path) const;

  // Diagnostics hook: perturb one stored value in place.
  void corrupt(std::int64_t flat, double delta);

private:
  std::shared_ptr<const Grid> grid_;
  ScalingField alpha_;
  std::shared_ptr<const GermFunction> germ_;
  BaseFunction base_;
  int level_ = 0;
  std::vector<std::vector<double>> axes_;  // level-r nodes per axis
  std::vector<int> shape_;
  std::vector<double> values_;
  double boundary_discrepancy_ = 0.0;
  double sup_alpha_ = 0.0;
};

// Point query without building a surface: descend `depth` times, seed with
// the germ, replay the recursion forward.
QueryResult eval_point(const Grid& grid, const ScalingField& alpha,
                       const GermFunction& germ, const BaseFunction& base,
                       const Point& x, int depth, int bound_grid_per_axis = 65);

// (sup|alpha| / (1 - sup|alpha|)) * sampled sup |f - b|.
double perturbation_bound(const Grid& grid, const ScalingField& alpha,
                          const GermFunction& germ, const BaseFunction& base,
                          int grid_per_axis);

// Data-interpolation mode: germ is the multilinear lift of `data`; base is
// the Bernstein polynomial of that germ unless a user base is supplied.
FractalSurface build_interpolant(const TabulatedGrid& data,
                                 std::vector<int> signature,
                                 const ScalingField& alpha,
                                 const std::vector<int>& bernstein_degrees,
                                 std::shared_ptr<const GermFunction> user_base,
                                 int level,
                                 std::int64_t budget = kDefaultValueBudget);

// Iterates the function-space contraction underlying the construction on
// the level-L grid, starting from the germ. Preimages of level-L points are
// level-(L-1) points, so each sweep needs only exact index lookups. Returns
// the sup-differences between successive sweeps (and, via `out_values`, the
// final iterate for comparison against a built surface).
std::vector<double> rb_iteration_sup_diffs(
    const Grid& grid, const ScalingField& alpha, const GermFunction& germ,
    const BaseFunction& base, int level, int steps,
    std::vector<double>* out_values = nullptr);

}  // namespace zipfrac
