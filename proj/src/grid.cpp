#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace zipfrac {

Grid::Grid(std::vector<std::vector<double>> nodes, std::vector<int> signature)
    : nodes_(std::move(nodes)), signature_(std::move(signature)) {
  if (nodes_.empty()) fail(ErrorCode::Argument, "grid needs at least one axis");
  if (signature_.size() != nodes_.size())
    fail(ErrorCode::Argument, "signature needs exactly one bit per axis");
  for (size_t k = 0; k < nodes_.size(); ++k) {
    const auto& xs = nodes_[k];
    if (xs.size() < 3)
      fail(ErrorCode::Argument, "axis " + std::to_string(k + 1) +
                                    ": need at least 2 subintervals");
    for (size_t i = 0; i + 1 < xs.size(); ++i)
      if (!(xs[i] < xs[i + 1]))
        fail(ErrorCode::Argument, "axis " + std::to_string(k + 1) +
                                      ": nodes must be strictly increasing");
    if (signature_[k] != 0 && signature_[k] != 1)
      fail(ErrorCode::Argument, "signature bits must be 0 or 1");
  }

  // Each map is pinned by its two endpoint conditions; solving them gives
  // the slope and intercept in absolute coordinates.
  slope_.resize(nodes_.size());
  intercept_.resize(nodes_.size());
  for (size_t k = 0; k < nodes_.size(); ++k) {
    const auto& xs = nodes_[k];
    const int n = static_cast<int>(xs.size()) - 1;
    const double x_lo = xs.front(), x_hi = xs.back();
    for (int j = 1; j <= n; ++j) {
      const double y0 = xs[tau(j, 0, n, signature_[k])];
      const double y1 = xs[tau(j, n, n, signature_[k])];
      const double a = (y1 - y0) / (x_hi - x_lo);
      slope_[k].push_back(a);
      intercept_[k].push_back(y0 - a * x_lo);
    }
  }
}

std::vector<int> Grid::cell_shape() const {
  std::vector<int> shape(dims());
  for (int k = 0; k < dims(); ++k) shape[k] = cells(k);
  return shape;
}

std::int64_t Grid::cell_count() const { return element_count(cell_shape()); }

Box Grid::box() const {
  Box b;
  for (int k = 0; k < dims(); ++k) {
    b.lo.push_back(lo(k));
    b.hi.push_back(hi(k));
  }
  return b;
}

int Grid::tau(int j, int endpoint, int n_cells, int sig_bit) {
  if (j < 1 || j > n_cells) fail(ErrorCode::Argument, "cell index out of range");
  if (endpoint != 0 && endpoint != n_cells)
    fail(ErrorCode::Argument, "endpoint must be 0 or the last node index");
  const bool odd = (j % 2) == 1;
  const bool at_zero = (endpoint == 0);
  if (odd == at_zero) return j - 1 + sig_bit;
  return j - sig_bit;
}

void Grid::check_cell(const CellIndex& j) const {
  if (static_cast<int>(j.size()) != dims())
    fail(ErrorCode::Argument, "cell index has wrong dimension");
  for (int k = 0; k < dims(); ++k)
    if (j[k] < 1 || j[k] > cells(k))
      fail(ErrorCode::Argument, "cell index out of range on axis " +
                                    std::to_string(k + 1));
}

void Grid::check_point(const Point& x, double rel_tol) const {
  if (static_cast<int>(x.size()) != dims())
    fail(ErrorCode::Domain, "point has wrong dimension");
  for (int k = 0; k < dims(); ++k) {
    const double slack = rel_tol * length(k);
    if (x[k] < lo(k) - slack || x[k] > hi(k) + slack)
      fail(ErrorCode::Domain, "point outside domain on axis " +
                                  std::to_string(k + 1));
  }
}

Point Grid::apply(const CellIndex& j, const Point& x) const {
  check_cell(j);
  check_point(x);
  Point y(dims());
  for (int k = 0; k < dims(); ++k) y[k] = apply(k, j[k], x[k]);
  return y;
}

Point Grid::invert(const CellIndex& j, const Point& x) const {
  check_cell(j);
  if (static_cast<int>(x.size()) != dims())
    fail(ErrorCode::Domain, "point has wrong dimension");
  Point y(dims());
  for (int k = 0; k < dims(); ++k) {
    const double c_lo = nodes_[k][j[k] - 1];
    const double c_hi = nodes_[k][j[k]];
    const double slack = 1e-12 * length(k);
    if (x[k] < c_lo - slack || x[k] > c_hi + slack)
      fail(ErrorCode::Domain,
           "point outside cell on axis " + std::to_string(k + 1));
    y[k] = invert(k, j[k], x[k]);
  }
  return y;
}

int Grid::locate(int axis, double x) const {
  const auto& xs = nodes_[axis];
  const double slack = 1e-12 * length(axis);
  if (x < xs.front() - slack || x > xs.back() + slack)
    fail(ErrorCode::Domain,
         "point outside domain on axis " + std::to_string(axis + 1));
  // First node >= x; ties at interior nodes go to the lower cell.
  const auto it = std::lower_bound(xs.begin(), xs.end(), x);
  int j = static_cast<int>(it - xs.begin());
  if (j < 1) j = 1;
  if (j > cells(axis)) j = cells(axis);
  return j;
}

CellIndex Grid::locate(const Point& x) const {
  check_point(x);
  CellIndex j(dims());
  for (int k = 0; k < dims(); ++k) j[k] = locate(k, x[k]);
  return j;
}

double axis_join_residual(const std::vector<double>& nodes,
                          const std::vector<double>& slopes,
                          const std::vector<double>& intercepts,
                          std::vector<double>* preimages,
                          std::vector<double>* residuals) {
  const int n = static_cast<int>(slopes.size());
  const double len = nodes.back() - nodes.front();
  double worst = 0.0;
  for (int j = 1; j < n; ++j) {
    const double node = nodes[j];
    const double left = (node - intercepts[j - 1]) / slopes[j - 1];
    const double right = (node - intercepts[j]) / slopes[j];
    const double res = std::abs(left - right) / len;
    if (preimages) preimages->push_back(0.5 * (left + right));
    if (residuals) residuals->push_back(res);
    worst = std::max(worst, res);
  }
  return worst;
}

JoinReport Grid::check_join() const {
  JoinReport report;
  report.preimages.resize(dims());
  report.residuals.resize(dims());
  for (int k = 0; k < dims(); ++k) {
    const double res = axis_join_residual(nodes_[k], slope_[k], intercept_[k],
                                          &report.preimages[k],
                                          &report.residuals[k]);
    report.max_residual = std::max(report.max_residual, res);
    if (res > 1e-12) report.ok = false;
  }
  return report;
}

bool Grid::is_uniform(double rel_tol) const {
  for (int k = 0; k < dims(); ++k) {
    const double step = length(k) / cells(k);
    for (int j = 1; j <= cells(k); ++j) {
      const double len = nodes_[k][j] - nodes_[k][j - 1];
      if (std::abs(len - step) > rel_tol * length(k)) return false;
    }
  }
  return true;
}

}  // namespace zipfrac
