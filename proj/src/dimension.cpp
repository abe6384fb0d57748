#include "dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zipfrac {

GammaResult dimension_gamma(const ScalingField& alpha, const Grid& grid,
                            int grid_per_axis) {
  GammaResult out;
  if (alpha.mode() == ScalingField::Mode::GlobalConstant) {
    out.value = grid.cell_count() * std::abs(alpha.constant_value());
    return out;
  }
  out.extended_hypothesis = true;
  const auto shape = grid.cell_shape();
  std::vector<int> cell0(grid.dims(), 0);
  CellIndex j(grid.dims());
  do {
    for (int k = 0; k < grid.dims(); ++k) j[k] = cell0[k] + 1;
    out.value += alpha.cell_sup_abs(grid, j, grid_per_axis);
  } while (next_index(cell0, shape));
  return out;
}

TheoryBounds theory_bounds(double gamma, double xi, int m,
                           const std::vector<int>& cells_per_axis) {
  if (!(xi > 0.0 && xi <= 1.0))
    fail(ErrorCode::Argument, "Holder exponent must lie in (0,1]");
  if (gamma < 0.0) fail(ErrorCode::Argument, "gamma must be >= 0");
  if (static_cast<int>(cells_per_axis.size()) != m)
    fail(ErrorCode::Argument, "cell count list must have m entries");
  double log_pn = 0.0;
  for (int n : cells_per_axis) {
    if (n < 2) fail(ErrorCode::Argument, "need at least 2 cells per axis");
    log_pn += std::log(static_cast<double>(n));
  }

  TheoryBounds b;
  b.lower = static_cast<double>(m);
  if (gamma <= 1.0) {
    b.which = DimensionCase::I;
    b.upper = m + 1.0 - xi;
  } else if (std::exp((xi - m) * log_pn) * gamma <= 1.0) {
    b.which = DimensionCase::II;
    b.upper = m + 1.0 - xi + std::log(gamma) / log_pn;
  } else {
    b.which = DimensionCase::III;
    b.upper = 1.0 + std::log(gamma) / log_pn;
  }
  return b;
}

std::int64_t box_count(const FractalSurface& surface, int r) {
  if (r < 0) fail(ErrorCode::Argument, "scale index must be >= 0");
  const Grid& grid = surface.grid();
  const int m = grid.dims();
  if (!grid.is_uniform())
    fail(ErrorCode::Unsupported,
         "box counting needs uniform partitions of [0,1]^m");
  for (int k = 0; k < m; ++k)
    if (std::abs(grid.lo(k)) > 1e-12 || std::abs(grid.hi(k) - 1.0) > 1e-12)
      fail(ErrorCode::Unsupported,
           "box counting needs the domain normalized to [0,1]^m");

  std::int64_t prod_n = 1;
  for (int k = 0; k < m; ++k) prod_n *= grid.cells(k);
  std::int64_t columns_per_axis = 1;
  for (int t = 0; t < r; ++t) {
    columns_per_axis *= prod_n;
    if (columns_per_axis > (std::int64_t(1) << 40))
      fail(ErrorCode::Argument, "scale index too large");
  }
  const double delta = 1.0 / static_cast<double>(columns_per_axis);

  // Per axis: sample index ranges [first, last] of each closed column.
  std::vector<std::vector<std::pair<int, int>>> ranges(m);
  for (int k = 0; k < m; ++k) {
    const auto& xs = surface.axis_nodes(k);
    const double intervals_per_column =
        static_cast<double>(xs.size() - 1) / columns_per_axis;
    if (intervals_per_column < 3.0)
      fail(ErrorCode::Resolution,
           "surface level too coarse for scale r=" + std::to_string(r) +
               " (fewer than 4 samples per column side)");
    ranges[k].resize(columns_per_axis);
    const double eps = delta * 1e-9;
    for (std::int64_t c = 0; c < columns_per_axis; ++c) {
      const double lo = c * delta, hi = (c + 1) * delta;
      const auto first =
          std::lower_bound(xs.begin(), xs.end(), lo - eps) - xs.begin();
      auto last =
          std::upper_bound(xs.begin(), xs.end(), hi + eps) - xs.begin() - 1;
      if (last < first)
        fail(ErrorCode::Resolution, "empty sample column at scale r");
      ranges[k][c] = {static_cast<int>(first), static_cast<int>(last)};
    }
  }

  const auto& values = surface.values();
  const auto& shape = surface.shape();
  std::vector<std::int64_t> col(m, 0);
  std::int64_t total = 0;
  while (true) {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    std::vector<int> idx(m);
    for (int k = 0; k < m; ++k) idx[k] = ranges[k][col[k]].first;
    while (true) {
      const double v = values[flat_index(idx, shape)];
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      int k = m - 1;
      for (; k >= 0; --k) {
        if (++idx[k] <= ranges[k][col[k]].second) break;
        idx[k] = ranges[k][col[k]].first;
      }
      if (k < 0) break;
    }
    total += static_cast<std::int64_t>(std::floor(mx / delta)) -
             static_cast<std::int64_t>(std::floor(mn / delta)) + 1;
    int k = m - 1;
    for (; k >= 0; --k) {
      if (++col[k] < columns_per_axis) break;
      col[k] = 0;
    }
    if (k < 0) break;
  }
  return total;
}

SlopeFit estimate_dimension(const std::vector<ScaleRow>& rows,
                            double log_prod_n) {
  if (rows.size() < 3)
    fail(ErrorCode::Argument, "slope fit needs at least 3 scales");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& row : rows) {
    const double x = row.r * log_prod_n;
    const double y = std::log(static_cast<double>(row.count));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(rows.size());
  const double denom = n * sxx - sx * sx;
  SlopeFit fit;
  fit.slope = denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.slope * sx) / n;
  for (const auto& row : rows) {
    const double x = row.r * log_prod_n;
    const double y = std::log(static_cast<double>(row.count));
    fit.residual =
        std::max(fit.residual, std::abs(y - (fit.slope * x + intercept)));
  }
  return fit;
}

namespace {

// True when the germ values at the partition nodes admit an exact affine
// fit, i.e. the interpolation points sit on a hyperplane.
bool data_affinely_dependent(const FractalSurface& surface) {
  const Grid& grid = surface.grid();
  const int m = grid.dims();
  std::vector<int> node_shape(m);
  for (int k = 0; k < m; ++k) node_shape[k] = grid.cells(k) + 1;

  // Normal equations for value ~ c0 + sum c_k x_k.
  const int dim = m + 1;
  std::vector<double> ata(dim * dim, 0.0), atb(dim, 0.0);
  double scale = 0.0;
  std::vector<int> node(m, 0);
  do {
    std::vector<double> row(dim, 1.0);
    for (int k = 0; k < m; ++k) row[k + 1] = grid.nodes(k)[node[k]];
    const double y = surface.node_value(node);
    scale = std::max(scale, std::abs(y));
    for (int a = 0; a < dim; ++a) {
      atb[a] += row[a] * y;
      for (int b = 0; b < dim; ++b) ata[a * dim + b] += row[a] * row[b];
    }
  } while (next_index(node, node_shape));

  // Gaussian elimination with partial pivoting; the system is tiny.
  std::vector<double> c(dim, 0.0);
  {
    std::vector<double> a = ata, b = atb;
    for (int col = 0; col < dim; ++col) {
      int pivot = col;
      for (int r2 = col + 1; r2 < dim; ++r2)
        if (std::abs(a[r2 * dim + col]) > std::abs(a[pivot * dim + col]))
          pivot = r2;
      for (int c2 = 0; c2 < dim; ++c2)
        std::swap(a[col * dim + c2], a[pivot * dim + c2]);
      std::swap(b[col], b[pivot]);
      const double d = a[col * dim + col];
      if (std::abs(d) < 1e-300) return true;  // degenerate geometry
      for (int r2 = col + 1; r2 < dim; ++r2) {
        const double f = a[r2 * dim + col] / d;
        for (int c2 = col; c2 < dim; ++c2)
          a[r2 * dim + c2] -= f * a[col * dim + c2];
        b[r2] -= f * b[col];
      }
    }
    for (int r2 = dim - 1; r2 >= 0; --r2) {
      double s = b[r2];
      for (int c2 = r2 + 1; c2 < dim; ++c2) s -= a[r2 * dim + c2] * c[c2];
      c[r2] = s / a[r2 * dim + r2];
    }
  }

  double worst = 0.0;
  std::fill(node.begin(), node.end(), 0);
  do {
    double fitted = c[0];
    for (int k = 0; k < m; ++k) fitted += c[k + 1] * grid.nodes(k)[node[k]];
    worst = std::max(worst, std::abs(fitted - surface.node_value(node)));
  } while (next_index(node, node_shape));
  return worst <= 1e-9 * std::max(1.0, scale);
}

}  // namespace

DimensionReport dimension_report(const FractalSurface& surface, double xi1,
                                 double xi2, int r_min, int r_max,
                                 int gamma_grid_per_axis) {
  if (r_max - r_min < 2)
    fail(ErrorCode::Argument, "need a scale range spanning at least 3 scales");
  const Grid& grid = surface.grid();
  const int m = grid.dims();

  DimensionReport report;
  if (xi1 <= 0.0) {
    if (!surface.germ().holder_exponent)
      fail(ErrorCode::Config, "germ Holder exponent unknown; pass xi1");
    xi1 = *surface.germ().holder_exponent;
  }
  if (xi2 <= 0.0) {
    const auto base_xi = surface.base().holder_exponent();
    if (!base_xi)
      fail(ErrorCode::Config, "base Holder exponent unknown; pass xi2");
    xi2 = *base_xi;
  }
  report.xi1 = xi1;
  report.xi2 = xi2;
  report.xi = std::min(xi1, xi2);

  const GammaResult g =
      dimension_gamma(surface.alpha(), grid, gamma_grid_per_axis);
  report.gamma = g.value;
  if (g.extended_hypothesis) report.flags.push_back("gamma-pullback-extension");

  report.bounds = theory_bounds(report.gamma, report.xi, m, grid.cell_shape());

  std::int64_t prod_n = 1;
  for (int k = 0; k < m; ++k) prod_n *= grid.cells(k);
  for (int r = r_min; r <= r_max; ++r) {
    ScaleRow row;
    row.r = r;
    row.delta = std::pow(static_cast<double>(prod_n), -r);
    row.count = box_count(surface, r);
    report.scales.push_back(row);
  }
  report.fit =
      estimate_dimension(report.scales, std::log(static_cast<double>(prod_n)));

  if (data_affinely_dependent(surface))
    report.flags.push_back("hypothesis-violated");
  if (report.fit.slope > report.bounds.upper + 0.2 ||
      report.fit.slope < m - 0.2)
    report.flags.push_back("slope-out-of-bounds");
  return report;
}

}  // namespace zipfrac
