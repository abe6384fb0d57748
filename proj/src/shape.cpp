#include "shape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace zipfrac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Iterates cells in lexicographic order, passing the 1-based index and its
// flat position.
template <typename F>
void for_cells(const Grid& grid, F&& visit) {
  const auto shape = grid.cell_shape();
  std::vector<int> cell0(grid.dims(), 0);
  CellIndex j(grid.dims());
  std::int64_t flat = 0;
  do {
    for (int k = 0; k < grid.dims(); ++k) j[k] = cell0[k] + 1;
    visit(j, flat++);
  } while (next_index(cell0, shape));
}

std::string cell_str(const CellIndex& j) {
  std::ostringstream os;
  os << "(";
  for (size_t k = 0; k < j.size(); ++k) os << (k ? "," : "") << j[k];
  os << ")";
  return os.str();
}

double germ_min(const GermFunction& f, const Box& box, int per_axis) {
  double mn = kInf;
  for_uniform_grid(box, per_axis,
                   [&](const Point& x) { mn = std::min(mn, f.eval(x)); });
  return mn;
}

double germ_sup_abs(const GermFunction& f, const Box& box, int per_axis) {
  double sup = 0.0;
  for_uniform_grid(box, per_axis, [&](const Point& x) {
    sup = std::max(sup, std::abs(f.eval(x)));
  });
  return sup;
}

GermFunction difference_germ(const GermFunction& f, const GermFunction& g) {
  GermFunction d;
  d.name = f.name + "-" + g.name;
  d.domain = f.domain;
  auto fe = f.eval_fn;
  auto ge = g.eval_fn;
  d.eval_fn = [fe, ge](const Point& x) { return fe(x) - ge(x); };
  if (f.has_gradient() && g.has_gradient()) {
    auto fp = f.partial_fn;
    auto gp = g.partial_fn;
    d.partial_fn = [fp, gp](const Point& x, int l) {
      return fp(x, l) - gp(x, l);
    };
  }
  return d;
}

}  // namespace

CellExtrema cell_extrema(const GermFunction& f, const Grid& grid,
                         const CellIndex& j, int grid_per_axis) {
  if (grid_per_axis < 33)
    fail(ErrorCode::Argument, "cell extrema need >= 33 samples per axis");
  grid.check_cell(j);
  CellExtrema e{kInf, -kInf, grid_per_axis};
  for_uniform_grid(grid.box(), grid_per_axis, [&](const Point& x) {
    const double v = f.eval(grid.apply(j, x));
    e.min = std::min(e.min, v);
    e.max = std::max(e.max, v);
  });
  return e;
}

std::vector<Interval> positivity_intervals(const GermFunction& f,
                                           const Grid& grid,
                                           const BernsteinSpec& bernstein,
                                           double c_n, int grid_per_axis) {
  if (germ_min(f, grid.box(), grid_per_axis) < 0.0)
    fail(ErrorCode::Config, "positivity needs a nonnegative germ");
  const auto [phi_n, big_phi_n] = bernstein.extrema(grid_per_axis);
  if (big_phi_n <= 0.0)
    fail(ErrorCode::Config, "positivity needs a germ that is not identically "
                            "zero");
  const double sup_f = germ_sup_abs(f, grid.box(), grid_per_axis);
  if (c_n <= 0.0) c_n = 1.05 * std::max(big_phi_n, sup_f) + 1e-9;
  if (!(c_n > big_phi_n && c_n > sup_f && c_n > phi_n))
    fail(ErrorCode::Config,
         "the positivity cap must exceed the Bernstein max and sup|f|");

  std::vector<Interval> out(grid.cell_count());
  for_cells(grid, [&](const CellIndex& j, std::int64_t flat) {
    const CellExtrema e = cell_extrema(f, grid, j, grid_per_axis);
    const double lo =
        std::max(-e.min / (c_n - phi_n), -(c_n - e.max) / big_phi_n);
    const double hi =
        std::min(e.min / big_phi_n, (c_n - e.max) / (c_n - phi_n));
    out[flat].lo = std::max(lo, -kAlphaClip);
    out[flat].hi = std::min(hi, kAlphaClip);
  });
  return out;
}

std::vector<Interval> dominance_intervals(const GermFunction& f,
                                          const GermFunction& g,
                                          const Grid& grid,
                                          const std::vector<int>& degrees,
                                          DominanceMode mode,
                                          int grid_per_axis) {
  const GermFunction diff = difference_germ(f, g);
  if (germ_min(diff, grid.box(), grid_per_axis) < 0.0)
    fail(ErrorCode::Config, "dominance needs f >= g on the sampling grid");

  double denom = 0.0;
  if (mode == DominanceMode::VsFunction) {
    BernsteinSpec bf(std::make_shared<GermFunction>(f), degrees);
    denom = bf.extrema(grid_per_axis).second -
            germ_min(g, grid.box(), grid_per_axis);
  } else {
    BernsteinSpec bdiff(std::make_shared<GermFunction>(diff), degrees);
    denom = bdiff.extrema(grid_per_axis).second;
  }

  std::vector<Interval> out(grid.cell_count());
  bool need_denom = false;
  for_cells(grid, [&](const CellIndex& j, std::int64_t flat) {
    const double phi = cell_extrema(diff, grid, j, grid_per_axis).min;
    out[flat].lo = 0.0;
    if (phi <= 0.0) {
      out[flat].hi = 0.0;
      return;
    }
    need_denom = true;
    if (denom > 0.0)
      out[flat].hi = std::min(std::min(phi / denom, 1.0), kAlphaClip);
  });
  if (need_denom && denom <= 0.0)
    fail(ErrorCode::Config, "dominance denominator is not positive");
  return out;
}

std::vector<Interval> monotone_intervals(const GermFunction& f,
                                         const Grid& grid,
                                         const BernsteinSpec& bernstein,
                                         int axis, int grid_per_axis) {
  if (axis < 0 || axis >= grid.dims())
    fail(ErrorCode::Argument, "axis out of range");
  if (grid_per_axis < 33)
    fail(ErrorCode::Argument, "monotone intervals need >= 33 samples per axis");

  double gamma_n = -kInf;
  double min_partial = kInf;
  for_uniform_grid(grid.box(), grid_per_axis, [&](const Point& x) {
    gamma_n = std::max(gamma_n, bernstein.partial(x, axis));
    min_partial = std::min(min_partial, f.partial(x, axis));
  });
  if (gamma_n <= 0.0)
    fail(ErrorCode::Config,
         "monotone intervals need a germ that increases along the axis "
         "(Bernstein derivative max is not positive)");
  if (min_partial < -1e-9)
    fail(ErrorCode::Config, "germ is not increasing along the axis");

  std::vector<Interval> out(grid.cell_count());
  for_cells(grid, [&](const CellIndex& j, std::int64_t flat) {
    // d(f о u_j)/dx_l = a_{l,j_l} * f_l(u_j(X))
    const double slope = grid.slope(axis, j[axis]);
    double lo = kInf, hi = -kInf;
    for_uniform_grid(grid.box(), grid_per_axis, [&](const Point& x) {
      const double d = slope * f.partial(grid.apply(j, x), axis);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    });
    if (grid.increasing(axis, j[axis])) {
      out[flat].lo = 0.0;
      out[flat].hi = std::min(std::max(lo, 0.0) / gamma_n, kAlphaClip);
    } else {
      out[flat].lo = std::max(std::min(hi, 0.0) / gamma_n, -kAlphaClip);
      out[flat].hi = 0.0;
    }
  });
  return out;
}

double pick_constant(const std::vector<Interval>& intervals, const Grid& grid,
                     bool demand_nonzero) {
  if (intervals.empty()) fail(ErrorCode::Argument, "no intervals");
  double lo = -kInf, hi = kInf;
  std::int64_t lo_cell = 0, hi_cell = 0;
  for (size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].lo > lo) {
      lo = intervals[i].lo;
      lo_cell = static_cast<std::int64_t>(i);
    }
    if (intervals[i].hi < hi) {
      hi = intervals[i].hi;
      hi_cell = static_cast<std::int64_t>(i);
    }
  }
  if (lo > hi) {
    // Recover the blocking cells' multi-indices for the diagnostic.
    const auto shape = grid.cell_shape();
    CellIndex a(shape.size()), b(shape.size());
    std::int64_t ra = lo_cell, rb = hi_cell;
    for (int k = static_cast<int>(shape.size()) - 1; k >= 0; --k) {
      a[k] = static_cast<int>(ra % shape[k]) + 1;
      ra /= shape[k];
      b[k] = static_cast<int>(rb % shape[k]) + 1;
      rb /= shape[k];
    }
    fail(ErrorCode::EmptyIntersection,
         "no constant lies in every cell interval: cell " + cell_str(a) +
             " needs >= " + std::to_string(lo) + " while cell " + cell_str(b) +
             " needs <= " + std::to_string(hi));
  }
  double pick = 0.0;
  if (hi > 0.0)
    pick = hi;
  else if (lo < 0.0)
    pick = lo;
  if (pick == 0.0 && demand_nonzero)
    fail(ErrorCode::EmptyIntersection,
         "only the zero scaling is admissible for every cell");
  return pick;
}

ScalingField pick_node_blend(const std::vector<Interval>& intervals,
                             const Grid& grid, int grid_per_axis, double tol) {
  const auto cell_shape = grid.cell_shape();
  if (static_cast<std::int64_t>(intervals.size()) !=
      element_count(cell_shape))
    fail(ErrorCode::Argument, "interval count does not match the cell grid");
  const int m = grid.dims();

  // Average the midpoint targets of the cells incident to each node.
  std::vector<int> node_shape(m);
  for (int k = 0; k < m; ++k) node_shape[k] = grid.cells(k) + 1;
  std::vector<double> node_values(element_count(node_shape), 0.0);
  std::vector<int> node(m, 0);
  std::int64_t nflat = 0;
  do {
    double sum = 0.0;
    int count = 0;
    std::vector<int> inc(m, 0);  // 0 -> lower incident cell, 1 -> upper
    do {
      CellIndex j(m);
      bool valid = true;
      for (int k = 0; k < m; ++k) {
        j[k] = node[k] + inc[k];  // candidate cells are node[k] and node[k]+1
        if (j[k] < 1 || j[k] > grid.cells(k)) valid = false;
      }
      if (valid) {
        const std::int64_t flat = [&] {
          std::vector<int> c(m);
          for (int k = 0; k < m; ++k) c[k] = j[k] - 1;
          return flat_index(c, cell_shape);
        }();
        sum += 0.5 * (intervals[flat].lo + intervals[flat].hi);
        ++count;
      }
    } while (next_index(inc, std::vector<int>(m, 2)));
    node_values[nflat++] = sum / count;
  } while (next_index(node, node_shape));

  for (int iter = 0; iter <= 40; ++iter) {
    bool all_zero = true;
    for (double v : node_values) all_zero &= (v == 0.0);
    ScalingField field = ScalingField::node_blend(grid, node_values);
    bool ok = true;
    for_cells(grid, [&](const CellIndex& j, std::int64_t flat) {
      if (!ok) return;
      const auto [mn, mx] = field.cell_range(grid, j, grid_per_axis);
      if (mn < intervals[flat].lo - tol || mx > intervals[flat].hi + tol)
        ok = false;
    });
    if (ok) return field;
    if (all_zero) break;
    for (double& v : node_values) v *= 0.5;
  }
  fail(ErrorCode::Config,
       "node blend does not fit the per-cell intervals even after shrinking");
}

namespace {

VerifyResult scan_min(const FractalSurface& s,
                      const std::vector<double>& quantity, double tol) {
  VerifyResult r;
  r.worst = kInf;
  std::int64_t argmin = 0;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(quantity.size());
       ++i) {
    if (quantity[i] < r.worst) {
      r.worst = quantity[i];
      argmin = i;
    }
  }
  const auto& shape = s.shape();
  r.location.resize(shape.size());
  std::int64_t rest = argmin;
  for (int k = static_cast<int>(shape.size()) - 1; k >= 0; --k) {
    r.location[k] = static_cast<int>(rest % shape[k]);
    rest /= shape[k];
  }
  r.pass = r.worst >= -tol;
  return r;
}

}  // namespace

VerifyResult verify_nonnegative(const FractalSurface& s, double tol) {
  return scan_min(s, s.values(), tol);
}

VerifyResult verify_dominates(const FractalSurface& f_surface,
                              const FractalSurface& g_surface, double tol) {
  if (f_surface.shape() != g_surface.shape())
    fail(ErrorCode::Argument, "surfaces live on different grids");
  std::vector<double> diff(f_surface.values().size());
  for (size_t i = 0; i < diff.size(); ++i)
    diff[i] = f_surface.values()[i] - g_surface.values()[i];
  return scan_min(f_surface, diff, tol);
}

VerifyResult verify_increasing(const FractalSurface& s, int axis, double tol) {
  const auto& shape = s.shape();
  const int m = static_cast<int>(shape.size());
  if (axis < 0 || axis >= m) fail(ErrorCode::Argument, "axis out of range");

  std::int64_t stride = 1;
  for (int k = axis + 1; k < m; ++k) stride *= shape[k];

  VerifyResult r;
  r.worst = kInf;
  std::vector<int> argmin(m, 0);
  std::vector<int> idx(m, 0);
  std::vector<int> limit = shape;
  limit[axis] -= 1;  // consecutive pairs along the axis
  std::int64_t flat;
  do {
    flat = flat_index(idx, shape);
    const double d = s.values()[flat + stride] - s.values()[flat];
    if (d < r.worst) {
      r.worst = d;
      argmin = idx;
    }
  } while (next_index(idx, limit));
  r.location = argmin;
  r.pass = r.worst >= -tol;
  return r;
}

ConvexChainReport convex_sequence_check(std::shared_ptr<const Grid> grid,
                                        const ScalingField& alpha,
                                        std::shared_ptr<const GermFunction> f,
                                        const std::vector<int>& n_list,
                                        int level, double tol) {
  if (n_list.size() < 2)
    fail(ErrorCode::Argument, "need at least two degrees to chain");
  for (size_t i = 0; i + 1 < n_list.size(); ++i)
    if (n_list[i] >= n_list[i + 1])
      fail(ErrorCode::Argument, "degree list must increase");
  if (!f->convex)
    fail(ErrorCode::Config, "the one-sided chain needs a convex germ");
  bool nonneg = true;
  const auto cell_shape = grid->cell_shape();
  std::vector<int> cell0(grid->dims(), 0);
  CellIndex j(grid->dims());
  do {
    for (int k = 0; k < grid->dims(); ++k) j[k] = cell0[k] + 1;
    if (alpha.cell_range(*grid, j, 33).first < 0.0) nonneg = false;
  } while (next_index(cell0, cell_shape));
  if (!nonneg)
    fail(ErrorCode::Config, "the one-sided chain needs nonnegative scalings");

  ConvexChainReport report;
  report.worst_step = kInf;
  report.worst_vs_f = kInf;
  std::vector<std::unique_ptr<FractalSurface>> surfaces;
  for (int n : n_list) {
    std::vector<int> degrees(grid->dims(), n);
    auto spec = std::make_shared<BernsteinSpec>(f, degrees);
    surfaces.push_back(std::make_unique<FractalSurface>(
        grid, alpha, f, BaseFunction::bernstein(spec), level));
  }
  for (size_t i = 0; i < surfaces.size(); ++i) {
    report.worst_vs_f =
        std::min(report.worst_vs_f, surfaces[i]->min_germ_minus(*f));
    if (i + 1 < surfaces.size()) {
      const VerifyResult step = verify_dominates(*surfaces[i + 1],
                                                 *surfaces[i], tol);
      report.rows.push_back({n_list[i], n_list[i + 1], step.worst});
      report.worst_step = std::min(report.worst_step, step.worst);
    }
  }
  report.pass = report.worst_step >= -tol && report.worst_vs_f >= -tol;
  return report;
}

}  // namespace zipfrac
