#include "surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "csvio.hpp"

namespace zipfrac {

BaseFunction BaseFunction::bernstein(
    std::shared_ptr<const BernsteinSpec> spec) {
  if (!spec) fail(ErrorCode::Argument, "null Bernstein base");
  BaseFunction b;
  b.kind = Kind::Bernstein;
  b.bernstein_spec = std::move(spec);
  return b;
}

BaseFunction BaseFunction::user(std::shared_ptr<const GermFunction> fn) {
  if (!fn) fail(ErrorCode::Argument, "null user base");
  BaseFunction b;
  b.kind = Kind::User;
  b.user_fn = std::move(fn);
  return b;
}

double BaseFunction::eval(const Point& x) const {
  return kind == Kind::Bernstein ? bernstein_spec->eval(x) : user_fn->eval(x);
}

const std::vector<int>* BaseFunction::degrees() const {
  return kind == Kind::Bernstein ? &bernstein_spec->degrees() : nullptr;
}

std::optional<double> BaseFunction::holder_exponent() const {
  return kind == Kind::Bernstein ? bernstein_spec->germ().holder_exponent
                                 : user_fn->holder_exponent;
}

namespace {

// Points per axis of the level-r grid, with the total checked against the
// value budget.
std::vector<int> level_shape(const Grid& grid, int level,
                             std::int64_t budget) {
  if (level < 0) fail(ErrorCode::Argument, "refinement level must be >= 0");
  std::vector<int> shape(grid.dims());
  __int128 total = 1;
  for (int k = 0; k < grid.dims(); ++k) {
    __int128 pts = 1;
    for (int s = 0; s <= level; ++s) {
      pts *= grid.cells(k);
      if (pts > (__int128(1) << 62)) fail(ErrorCode::Budget,
                                          "refinement level overflows");
    }
    pts += 1;
    total *= pts;
    if (total > (__int128(1) << 62))
      fail(ErrorCode::Budget, "refinement level overflows");
    shape[k] = static_cast<int>(std::min<__int128>(pts, 1 << 30));
  }
  if (total > budget)
    fail(ErrorCode::Budget,
         "level " + std::to_string(level) + " needs " +
             std::to_string(static_cast<long long>(total)) +
             " stored values, over the budget of " + std::to_string(budget));
  return shape;
}

// One refinement sweep of an axis: the images of the old nodes under every
// cell map, in ascending order. Partition nodes are snapped exactly so that
// nested levels agree bit for bit (old index i lives at new index i*N).
std::vector<double> refine_axis(const Grid& grid, int axis,
                                const std::vector<double>& old_nodes) {
  const int n = grid.cells(axis);
  const int seg = static_cast<int>(old_nodes.size()) - 1;
  std::vector<double> out(static_cast<size_t>(n) * seg + 1);
  for (int j = 1; j <= n; ++j) {
    const bool inc = grid.increasing(axis, j);
    for (int i = 0; i <= seg; ++i) {
      const int pos = inc ? (j - 1) * seg + i : j * seg - i;
      out[pos] = grid.apply(axis, j, old_nodes[i]);
    }
  }
  for (int j = 0; j <= n; ++j)
    out[static_cast<size_t>(j) * seg] = grid.nodes(axis)[j];
  return out;
}

Point point_from(const std::vector<std::vector<double>>& axes,
                 const std::vector<int>& idx) {
  Point x(axes.size());
  for (size_t k = 0; k < axes.size(); ++k) x[k] = axes[k][idx[k]];
  return x;
}

}  // namespace

FractalSurface::FractalSurface(std::shared_ptr<const Grid> grid,
                               ScalingField alpha,
                               std::shared_ptr<const GermFunction> germ,
                               BaseFunction base, int level,
                               std::int64_t budget)
    : grid_(std::move(grid)),
      alpha_(std::move(alpha)),
      germ_(std::move(germ)),
      base_(std::move(base)),
      level_(level) {
  if (!grid_ || !germ_) fail(ErrorCode::Argument, "null grid or germ");
  const int m = grid_->dims();
  if (germ_->domain.dims() != m)
    fail(ErrorCode::Argument, "germ dimension does not match the grid");
  for (int k = 0; k < m; ++k) {
    const double tol = 1e-12 * grid_->length(k);
    if (std::abs(germ_->domain.lo[k] - grid_->lo(k)) > tol ||
        std::abs(germ_->domain.hi[k] - grid_->hi(k)) > tol)
      fail(ErrorCode::Argument, "germ domain does not match the partition");
  }

  // Corner matching of the base function.
  for (int corner = 0; corner < (1 << m); ++corner) {
    Point x(m);
    for (int k = 0; k < m; ++k)
      x[k] = ((corner >> k) & 1) ? grid_->hi(k) : grid_->lo(k);
    const double fv = germ_->eval(x);
    const double bv = base_.eval(x);
    if (std::abs(fv - bv) > 1e-10 * std::max(1.0, std::abs(fv)))
      fail(ErrorCode::Argument,
           "base function does not match the germ at a domain corner");
  }

  level_shape(*grid_, level_, budget);  // budget gate before any allocation
  sup_alpha_ = alpha_.sup_abs(*grid_);

  // Level 0: germ values at the partition nodes.
  axes_.resize(m);
  shape_.resize(m);
  for (int k = 0; k < m; ++k) {
    axes_[k] = grid_->nodes(k);
    shape_[k] = static_cast<int>(axes_[k].size());
  }
  values_.resize(element_count(shape_));
  {
    std::vector<int> idx(m, 0);
    std::int64_t flat = 0;
    do {
      values_[flat++] = germ_->eval(point_from(axes_, idx));
    } while (next_index(idx, shape_));
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int s = 0; s < level_; ++s) {
    // Base values on the current grid, reused by every cell.
    std::vector<double> base_cache(values_.size());
    {
      std::vector<int> idx(m, 0);
      std::int64_t flat = 0;
      do {
        base_cache[flat++] = base_.eval(point_from(axes_, idx));
      } while (next_index(idx, shape_));
    }

    std::vector<std::vector<double>> next_axes(m);
    std::vector<int> next_shape(m);
    for (int k = 0; k < m; ++k) {
      next_axes[k] = refine_axis(*grid_, k, axes_[k]);
      next_shape[k] = static_cast<int>(next_axes[k].size());
    }
    std::vector<double> next(element_count(next_shape), nan);

    std::vector<int> cell0(m, 0);  // 0-based cell odometer
    const auto cell_shape = grid_->cell_shape();
    std::vector<std::vector<int>> pos(m);
    CellIndex j(m);
    do {
      for (int k = 0; k < m; ++k) {
        j[k] = cell0[k] + 1;
        const int seg = shape_[k] - 1;
        pos[k].resize(shape_[k]);
        const bool inc = grid_->increasing(k, j[k]);
        for (int i = 0; i <= seg; ++i)
          pos[k][i] = inc ? (j[k] - 1) * seg + i : j[k] * seg - i;
      }
      std::vector<int> idx(m, 0);
      std::vector<int> child(m, 0);
      std::int64_t flat = 0;
      do {
        const Point x = point_from(axes_, idx);
        const double a = alpha_.alpha(*grid_, j, x);
        for (int k = 0; k < m; ++k) child[k] = pos[k][idx[k]];
        const std::int64_t cflat = flat_index(child, next_shape);
        const double v = germ_->eval(point_from(next_axes, child)) +
                         a * (values_[flat] - base_cache[flat]);
        if (std::isnan(next[cflat])) {
          next[cflat] = v;
        } else {
          // Shared boundary points are produced by every adjacent cell; the
          // matching conditions make the results agree.
          boundary_discrepancy_ =
              std::max(boundary_discrepancy_, std::abs(next[cflat] - v));
        }
        ++flat;
      } while (next_index(idx, shape_));
    } while (next_index(cell0, cell_shape));

    axes_ = std::move(next_axes);
    shape_ = std::move(next_shape);
    values_ = std::move(next);
  }

  if (boundary_discrepancy_ > 1e-10)
    fail(ErrorCode::Argument,
         "adjacent cells disagree at shared boundary points (worst " +
             std::to_string(boundary_discrepancy_) +
             "); the scaling field or base violates the matching conditions");
}

Point FractalSurface::point_at(const std::vector<int>& idx) const {
  return point_from(axes_, idx);
}

double FractalSurface::node_value(const std::vector<int>& node_idx) const {
  const int m = grid_->dims();
  if (static_cast<int>(node_idx.size()) != m)
    fail(ErrorCode::Argument, "node index has wrong dimension");
  std::vector<int> idx(m);
  for (int k = 0; k < m; ++k) {
    if (node_idx[k] < 0 || node_idx[k] > grid_->cells(k))
      fail(ErrorCode::Argument, "node index out of range");
    std::int64_t stride = 1;
    for (int s = 0; s < level_; ++s) stride *= grid_->cells(k);
    idx[k] = static_cast<int>(node_idx[k] * stride);
  }
  return value_at(idx);
}

double FractalSurface::residual_check(std::int64_t samples,
                                      unsigned seed) const {
  if (level_ == 0) return 0.0;
  const int m = grid_->dims();
  std::vector<int> pshape(m);
  for (int k = 0; k < m; ++k)
    pshape[k] = (shape_[k] - 1) / grid_->cells(k) + 1;
  const auto cell_shape = grid_->cell_shape();

  double worst = 0.0;
  auto probe = [&](const std::vector<int>& pidx, const CellIndex& j) {
    std::vector<int> pfinal(m), child(m);
    for (int k = 0; k < m; ++k) {
      // Nested levels align index-wise at multiples of N_k, so the parent's
      // final-level position is its coarse index times N_k; the child index
      // from the last refinement sweep is already final-level.
      pfinal[k] = pidx[k] * grid_->cells(k);
      const int seg = pshape[k] - 1;
      child[k] = grid_->increasing(k, j[k]) ? (j[k] - 1) * seg + pidx[k]
                                            : j[k] * seg - pidx[k];
    }
    const Point x = point_from(axes_, pfinal);
    const Point u = point_from(axes_, child);
    const double expect =
        germ_->eval(u) +
        alpha_.alpha(*grid_, j, x) * (value_at(pfinal) - base_.eval(x));
    worst = std::max(worst, std::abs(value_at(child) - expect));
  };

  if (samples <= 0) {
    std::vector<int> cell0(m, 0);
    CellIndex j(m);
    do {
      for (int k = 0; k < m; ++k) j[k] = cell0[k] + 1;
      std::vector<int> pidx(m, 0);
      do {
        probe(pidx, j);
      } while (next_index(pidx, pshape));
    } while (next_index(cell0, cell_shape));
  } else {
    std::mt19937 rng(seed);
    std::vector<int> pidx(m);
    CellIndex j(m);
    for (std::int64_t t = 0; t < samples; ++t) {
      for (int k = 0; k < m; ++k) {
        pidx[k] = std::uniform_int_distribution<int>(0, pshape[k] - 1)(rng);
        j[k] = std::uniform_int_distribution<int>(1, grid_->cells(k))(rng);
      }
      probe(pidx, j);
    }
  }
  return worst;
}

double FractalSurface::sup_vs(const GermFunction& g) const {
  double sup = 0.0;
  std::vector<int> idx(grid_->dims(), 0);
  std::int64_t flat = 0;
  do {
    sup = std::max(sup, std::abs(values_[flat++] - g.eval(point_from(axes_, idx))));
  } while (next_index(idx, shape_));
  return sup;
}

double FractalSurface::min_germ_minus(const GermFunction& g) const {
  double mn = std::numeric_limits<double>::infinity();
  std::vector<int> idx(grid_->dims(), 0);
  std::int64_t flat = 0;
  do {
    mn = std::min(mn, g.eval(point_from(axes_, idx)) - values_[flat++]);
  } while (next_index(idx, shape_));
  return mn;
}

QueryResult FractalSurface::query(const Point& x, int depth,
                                  int bound_grid_per_axis) const {
  return eval_point(*grid_, alpha_, *germ_, base_, x, depth,
                    bound_grid_per_axis);
}

double FractalSurface::perturbation_bound(int grid_per_axis) const {
  return zipfrac::perturbation_bound(*grid_, alpha_, *germ_, base_,
                                     grid_per_axis);
}

void FractalSurface::write_csv(const std::string& path) const {
  write_file_atomic(path, csv_from_grid(axes_, values_));
}

void FractalSurface::corrupt(std::int64_t flat, double delta) {
  if (flat < 0 || flat >= static_cast<std::int64_t>(values_.size()))
    fail(ErrorCode::Argument, "corrupt index out of range");
  values_[flat] += delta;
}

QueryResult eval_point(const Grid& grid, const ScalingField& alpha,
                       const GermFunction& germ, const BaseFunction& base,
                       const Point& x, int depth, int bound_grid_per_axis) {
  if (depth < 0) fail(ErrorCode::Argument, "depth must be >= 0");
  grid.check_point(x);

  std::vector<CellIndex> cells;
  std::vector<Point> points{x};
  for (int t = 0; t < depth; ++t) {
    const CellIndex j = grid.locate(points.back());
    points.push_back(grid.invert(j, points.back()));
    cells.push_back(j);
  }

  double y = germ.eval(points.back());
  double path_product = 1.0;
  for (int t = depth - 1; t >= 0; --t) {
    const double a = alpha.alpha(grid, cells[t], points[t + 1]);
    y = germ.eval(points[t]) + a * (y - base.eval(points[t + 1]));
    path_product *= std::abs(a);
  }

  // The seed error |surface - germ| at the deepest preimage shrinks by the
  // |alpha| factors met on the way back up.
  QueryResult out;
  out.value = y;
  out.error_bound =
      path_product *
      perturbation_bound(grid, alpha, germ, base, bound_grid_per_axis);
  return out;
}

double perturbation_bound(const Grid& grid, const ScalingField& alpha,
                          const GermFunction& germ, const BaseFunction& base,
                          int grid_per_axis) {
  const double s = alpha.sup_abs(grid);
  if (s >= 1.0) fail(ErrorCode::Argument, "scaling sup must be < 1");
  if (s == 0.0) return 0.0;
  const int m = grid.dims();
  std::vector<int> shape(m, grid_per_axis);
  std::vector<int> idx(m, 0);
  Point x(m);
  double sup = 0.0;
  do {
    for (int k = 0; k < m; ++k)
      x[k] = grid.lo(k) + grid.length(k) * idx[k] / (grid_per_axis - 1.0);
    sup = std::max(sup, std::abs(germ.eval(x) - base.eval(x)));
  } while (next_index(idx, shape));
  return s / (1.0 - s) * sup;
}

FractalSurface build_interpolant(const TabulatedGrid& data,
                                 std::vector<int> signature,
                                 const ScalingField& alpha,
                                 const std::vector<int>& bernstein_degrees,
                                 std::shared_ptr<const GermFunction> user_base,
                                 int level, std::int64_t budget) {
  data.validate();
  auto grid = std::make_shared<Grid>(data.nodes, std::move(signature));
  auto germ = std::make_shared<GermFunction>(lift_tabulated(data));
  BaseFunction base =
      user_base ? BaseFunction::user(std::move(user_base))
                : BaseFunction::bernstein(std::make_shared<BernsteinSpec>(
                      germ, bernstein_degrees));
  return FractalSurface(std::move(grid), alpha, std::move(germ),
                        std::move(base), level, budget);
}

std::vector<double> rb_iteration_sup_diffs(const Grid& grid,
                                           const ScalingField& alpha,
                                           const GermFunction& germ,
                                           const BaseFunction& base, int level,
                                           int steps,
                                           std::vector<double>* out_values) {
  if (level < 1) fail(ErrorCode::Argument, "iteration level must be >= 1");
  const int m = grid.dims();

  std::vector<std::vector<double>> axes(m);
  std::vector<int> shape(m);
  for (int k = 0; k < m; ++k) {
    axes[k] = grid.nodes(k);
    for (int s = 0; s < level; ++s) axes[k] = refine_axis(grid, k, axes[k]);
    shape[k] = static_cast<int>(axes[k].size());
  }
  if (element_count(shape) > kDefaultValueBudget)
    fail(ErrorCode::Budget, "iteration grid over the value budget");

  // Per axis and grid position: owning cell (ties to the lower cell) and the
  // index of the preimage, which is itself a grid point of the nested
  // coarser level.
  std::vector<std::vector<int>> cell_of(m), parent_of(m);
  for (int k = 0; k < m; ++k) {
    const int n = grid.cells(k);
    const int seg = (shape[k] - 1) / n;
    cell_of[k].resize(shape[k]);
    parent_of[k].resize(shape[k]);
    for (int p = 0; p < shape[k]; ++p) {
      const int j = p == 0 ? 1 : (p + seg - 1) / seg;
      const int d = p - (j - 1) * seg;
      const int i = grid.increasing(k, j) ? d : seg - d;
      cell_of[k][p] = j;
      parent_of[k][p] = i * n;
    }
  }

  const std::int64_t total = element_count(shape);
  std::vector<double> f_grid(total), b_grid(total);
  {
    std::vector<int> idx(m, 0);
    std::int64_t flat = 0;
    do {
      const Point x = point_from(axes, idx);
      f_grid[flat] = germ.eval(x);
      b_grid[flat] = base.eval(x);
      ++flat;
    } while (next_index(idx, shape));
  }

  std::vector<double> g = f_grid, next(total);
  std::vector<double> sup_diffs;
  for (int step = 0; step < steps; ++step) {
    std::vector<int> idx(m, 0);
    std::int64_t flat = 0;
    CellIndex j(m);
    std::vector<int> par(m);
    double sup = 0.0;
    do {
      for (int k = 0; k < m; ++k) {
        j[k] = cell_of[k][idx[k]];
        par[k] = parent_of[k][idx[k]];
      }
      const std::int64_t pflat = flat_index(par, shape);
      const Point y = point_from(axes, par);
      const double a = alpha.alpha(grid, j, y);
      next[flat] = f_grid[flat] + a * (g[pflat] - b_grid[pflat]);
      sup = std::max(sup, std::abs(next[flat] - g[flat]));
      ++flat;
    } while (next_index(idx, shape));
    g.swap(next);
    sup_diffs.push_back(sup);
  }
  if (out_values) *out_values = std::move(g);
  return sup_diffs;
}

}  // namespace zipfrac
