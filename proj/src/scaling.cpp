#include "scaling.hpp"

#include <algorithm>
#include <cmath>

#include "germ.hpp"

namespace zipfrac {

ScalingField ScalingField::constant(double c) {
  if (!(std::abs(c) < 1.0))
    fail(ErrorCode::Argument, "scaling constant must satisfy |c| < 1");
  ScalingField s;
  s.mode_ = Mode::GlobalConstant;
  s.constant_ = c;
  s.declared_bound_ = std::abs(c);
  s.label_ = "constant";
  return s;
}

ScalingField ScalingField::pullback(std::function<double(const Point&)> fn,
                                    std::string label, double declared_bound,
                                    const Grid& grid) {
  if (!fn) fail(ErrorCode::Argument, "null scaling function");
  if (!(declared_bound < 1.0))
    fail(ErrorCode::Argument, "scaling field bound must be < 1");
  ScalingField s;
  s.mode_ = Mode::Pullback;
  s.global_fn_ = std::move(fn);
  s.declared_bound_ = declared_bound;
  s.label_ = std::move(label);

  // Cells tile the domain, so sampling the global function over the domain
  // covers every alpha_j.
  const int m = grid.dims();
  std::vector<int> shape(m, 65);
  std::vector<int> idx(m, 0);
  Point x(m);
  do {
    for (int k = 0; k < m; ++k)
      x[k] = grid.lo(k) + grid.length(k) * idx[k] / 64.0;
    if (!(std::abs(s.global_fn_(x)) < 1.0))
      fail(ErrorCode::Argument, "scaling field reaches |alpha| >= 1");
  } while (next_index(idx, shape));
  return s;
}

ScalingField ScalingField::node_blend(const Grid& grid,
                                      std::vector<double> node_values) {
  TabulatedGrid tab;
  for (int k = 0; k < grid.dims(); ++k) tab.nodes.push_back(grid.nodes(k));
  tab.values = std::move(node_values);
  tab.validate();
  double bound = 0.0;
  for (double v : tab.values) bound = std::max(bound, std::abs(v));
  auto lifted = std::make_shared<GermFunction>(lift_tabulated(tab));
  return pullback([lifted](const Point& x) { return lifted->eval_fn(x); },
                  "nodeblend", bound, grid);
}

namespace {

// Plateau weight of cell j on one axis: 1 deep inside [x_{j-1}, x_j], linear
// ramps of half-width h_i around each interior node x_i. Adjacent weights are
// complementary, so the per-axis weights form a partition of unity.
double plateau_weight(const std::vector<double>& xs, int j, double plateau,
                      double x) {
  const int n = static_cast<int>(xs.size()) - 1;
  auto half_width = [&](int i) {
    const double left = xs[i] - xs[i - 1];
    const double right = xs[i + 1] - xs[i];
    return 0.5 * (1.0 - plateau) * std::min(left, right);
  };
  double w = 1.0;
  if (j - 1 >= 1) {  // ramp up across the lower interior node
    const double h = half_width(j - 1);
    const double t = (x - (xs[j - 1] - h)) / (2.0 * h);
    w = std::min(w, std::clamp(t, 0.0, 1.0));
  } else if (x < xs[0]) {
    w = 0.0;
  }
  if (j <= n - 1) {  // ramp down across the upper interior node
    const double h = half_width(j);
    const double t = ((xs[j] + h) - x) / (2.0 * h);
    w = std::min(w, std::clamp(t, 0.0, 1.0));
  } else if (x > xs[n]) {
    w = 0.0;
  }
  return w;
}

}  // namespace

ScalingField ScalingField::cell_blend(const Grid& grid,
                                      std::vector<double> cell_values,
                                      double plateau) {
  if (!(plateau >= 0.0 && plateau < 1.0))
    fail(ErrorCode::Argument, "plateau fraction must lie in [0,1)");
  const auto shape = grid.cell_shape();
  if (static_cast<std::int64_t>(cell_values.size()) != element_count(shape))
    fail(ErrorCode::Argument, "cell value count does not match the cell grid");
  double bound = 0.0;
  for (double v : cell_values) bound = std::max(bound, std::abs(v));

  const int m = grid.dims();
  std::vector<std::vector<double>> nodes;
  for (int k = 0; k < m; ++k) nodes.push_back(grid.nodes(k));
  auto values = std::make_shared<std::vector<double>>(std::move(cell_values));

  auto fn = [nodes, values, shape, plateau, m](const Point& x) {
    double sum = 0.0;
    std::vector<int> cell(m, 0);
    std::int64_t flat = 0;
    do {
      double w = (*values)[flat++];
      for (int k = 0; k < m && w != 0.0; ++k)
        w *= plateau_weight(nodes[k], cell[k] + 1, plateau, x[k]);
      sum += w;
    } while (next_index(cell, shape));
    return sum;
  };
  return pullback(std::move(fn), "cellblend", bound, grid);
}

double ScalingField::constant_value() const {
  if (mode_ != Mode::GlobalConstant)
    fail(ErrorCode::Argument, "scaling field is not a global constant");
  return constant_;
}

double ScalingField::alpha(const Grid& grid, const CellIndex& j,
                           const Point& x) const {
  if (mode_ == Mode::GlobalConstant) return constant_;
  return global_fn_(grid.apply(j, x));
}

double ScalingField::sup_abs(const Grid& grid, int grid_per_axis) const {
  if (mode_ == Mode::GlobalConstant) return std::abs(constant_);
  const int m = grid.dims();
  std::vector<int> shape(m, grid_per_axis);
  std::vector<int> idx(m, 0);
  Point x(m);
  double sup = 0.0;
  do {
    for (int k = 0; k < m; ++k)
      x[k] = grid.lo(k) + grid.length(k) * idx[k] / (grid_per_axis - 1.0);
    sup = std::max(sup, std::abs(global_fn_(x)));
  } while (next_index(idx, shape));
  return std::min(sup, declared_bound_);
}

namespace {

template <typename F>
void scan_cell(const Grid& grid, const CellIndex& j, int per_axis, F&& visit) {
  grid.check_cell(j);
  const int m = grid.dims();
  std::vector<int> shape(m, per_axis);
  std::vector<int> idx(m, 0);
  Point x(m);
  do {
    for (int k = 0; k < m; ++k)
      x[k] = grid.lo(k) + grid.length(k) * idx[k] / (per_axis - 1.0);
    visit(x);
  } while (next_index(idx, shape));
}

}  // namespace

std::pair<double, double> ScalingField::cell_range(const Grid& grid,
                                                   const CellIndex& j,
                                                   int grid_per_axis) const {
  if (mode_ == Mode::GlobalConstant) return {constant_, constant_};
  double mn = std::numeric_limits<double>::infinity();
  double mx = -mn;
  scan_cell(grid, j, grid_per_axis, [&](const Point& x) {
    const double a = alpha(grid, j, x);
    mn = std::min(mn, a);
    mx = std::max(mx, a);
  });
  return {mn, mx};
}

double ScalingField::cell_sup_abs(const Grid& grid, const CellIndex& j,
                                  int grid_per_axis) const {
  const auto [mn, mx] = cell_range(grid, j, grid_per_axis);
  return std::max(std::abs(mn), std::abs(mx));
}

}  // namespace zipfrac
