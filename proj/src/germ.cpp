#include "germ.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace zipfrac {

double GermFunction::eval(const Point& x) const {
  if (!domain.contains(x, 1e-12))
    fail(ErrorCode::Domain, "germ '" + name + "' evaluated outside its domain");
  return eval_fn(x);
}

double GermFunction::partial(const Point& x, int axis) const {
  if (axis < 0 || axis >= domain.dims())
    fail(ErrorCode::Argument, "axis out of range");
  if (partial_fn) return partial_fn(x, axis);
  const double h = 1e-6 * domain.length(axis);
  Point fwd = x, bwd = x;
  fwd[axis] = std::min(x[axis] + h, domain.hi[axis]);
  bwd[axis] = std::max(x[axis] - h, domain.lo[axis]);
  return (eval(fwd) - eval(bwd)) / (fwd[axis] - bwd[axis]);
}

std::vector<int> TabulatedGrid::shape() const {
  std::vector<int> s;
  for (const auto& xs : nodes) s.push_back(static_cast<int>(xs.size()));
  return s;
}

void TabulatedGrid::validate() const {
  if (nodes.empty()) fail(ErrorCode::Argument, "tabulated grid has no axes");
  for (size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].size() < 2)
      fail(ErrorCode::Argument, "tabulated grid axis " + std::to_string(k + 1) +
                                    " needs at least 2 nodes");
    for (size_t i = 0; i + 1 < nodes[k].size(); ++i)
      if (!(nodes[k][i] < nodes[k][i + 1]))
        fail(ErrorCode::Argument, "tabulated grid nodes must increase");
  }
  if (static_cast<std::int64_t>(values.size()) != element_count(shape()))
    fail(ErrorCode::Argument, "tabulated grid value count does not match the "
                              "node counts");
}

double TabulatedGrid::at(const std::vector<int>& idx) const {
  return values[flat_index(idx, shape())];
}

GermFunction lift_tabulated(const TabulatedGrid& data) {
  data.validate();
  const auto grid = std::make_shared<TabulatedGrid>(data);
  const int m = static_cast<int>(grid->nodes.size());

  GermFunction f;
  f.name = "tabulated";
  for (int k = 0; k < m; ++k) {
    f.domain.lo.push_back(grid->nodes[k].front());
    f.domain.hi.push_back(grid->nodes[k].back());
  }
  f.eval_fn = [grid, m](const Point& x) {
    // Locate the bracketing interval per axis (ties to the lower interval,
    // matching Grid::locate) and blend the 2^m surrounding samples.
    std::vector<int> base(m);
    std::vector<double> t(m);
    for (int k = 0; k < m; ++k) {
      const auto& xs = grid->nodes[k];
      auto it = std::lower_bound(xs.begin(), xs.end(), x[k]);
      int j = static_cast<int>(it - xs.begin());
      j = std::clamp(j, 1, static_cast<int>(xs.size()) - 1);
      base[k] = j - 1;
      t[k] = (x[k] - xs[j - 1]) / (xs[j] - xs[j - 1]);
    }
    const auto shape = grid->shape();
    double sum = 0.0;
    for (int corner = 0; corner < (1 << m); ++corner) {
      double w = 1.0;
      std::vector<int> idx(m);
      for (int k = 0; k < m; ++k) {
        const bool upper = (corner >> k) & 1;
        idx[k] = base[k] + (upper ? 1 : 0);
        w *= upper ? t[k] : 1.0 - t[k];
      }
      sum += w * grid->values[flat_index(idx, shape)];
    }
    return sum;
  };
  return f;
}

namespace {

double prod_except(const Point& x, int skip) {
  double p = 1.0;
  for (size_t k = 0; k < x.size(); ++k)
    if (static_cast<int>(k) != skip) p *= x[k];
  return p;
}

bool is_unit_box(const Box& b) {
  for (int k = 0; k < b.dims(); ++k)
    if (b.lo[k] != 0.0 || b.hi[k] != 1.0) return false;
  return true;
}

double corner_norm(const Box& b) {
  double s = 0.0;
  for (int k = 0; k < b.dims(); ++k)
    s += std::pow(std::max(std::abs(b.lo[k]), std::abs(b.hi[k])), 2);
  return std::sqrt(s);
}

}  // namespace

GermFunction make_builtin_germ(const std::string& name, const Box& domain,
                               const AffineParams& affine) {
  if (domain.dims() < 1) fail(ErrorCode::Argument, "germ domain has no axes");
  const int m = domain.dims();
  constexpr double half_pi = std::numbers::pi / 2.0;

  GermFunction f;
  f.name = name;
  f.domain = domain;

  if (name == "sinprod") {
    f.eval_fn = [](const Point& x) {
      double p = 1.0;
      for (double v : x) p *= v;
      return std::sin(half_pi * p);
    };
    f.partial_fn = [](const Point& x, int l) {
      double p = 1.0;
      for (double v : x) p *= v;
      return half_pi * prod_except(x, l) * std::cos(half_pi * p);
    };
    if (is_unit_box(domain)) {
      // |grad| <= (pi/2) * sqrt(m) on the unit box
      f.holder_exponent = 1.0;
      f.holder_constant = half_pi * std::sqrt(static_cast<double>(m));
    }
  } else if (name == "sqsum" || name == "oneplussq") {
    const double shift = (name == "oneplussq") ? 1.0 : 0.0;
    f.eval_fn = [shift](const Point& x) {
      double s = shift;
      for (double v : x) s += v * v;
      return s;
    };
    f.partial_fn = [](const Point& x, int l) { return 2.0 * x[l]; };
    f.holder_exponent = 1.0;
    f.holder_constant = 2.0 * corner_norm(domain);
    f.convex = true;
  } else if (name == "affine") {
    std::vector<double> c = affine.coeffs;
    if (c.empty()) c.assign(m, 1.0);
    if (static_cast<int>(c.size()) != m)
      fail(ErrorCode::Argument, "affine germ: coefficient count != dims");
    const double c0 = affine.c0;
    f.eval_fn = [c, c0](const Point& x) {
      double s = c0;
      for (size_t k = 0; k < x.size(); ++k) s += c[k] * x[k];
      return s;
    };
    f.partial_fn = [c](const Point&, int l) { return c[l]; };
    f.holder_exponent = 1.0;
    double n2 = 0.0;
    for (double v : c) n2 += v * v;
    f.holder_constant = std::sqrt(n2);
    f.convex = true;
  } else {
    fail(ErrorCode::Config, "unknown builtin germ '" + name + "'");
  }

  validate_gradient(f, 16, 0xa11ce);
  return f;
}

std::vector<std::string> builtin_germ_names() {
  return {"sinprod", "sqsum", "oneplussq", "affine"};
}

void validate_gradient(const GermFunction& f, int points, unsigned seed) {
  if (!f.has_gradient()) return;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const int m = f.domain.dims();
  for (int t = 0; t < points; ++t) {
    Point x(m);
    for (int k = 0; k < m; ++k)
      x[k] = f.domain.lo[k] + unit(rng) * f.domain.length(k);
    for (int l = 0; l < m; ++l) {
      const double h = 1e-6 * f.domain.length(l);
      Point fwd = x, bwd = x;
      fwd[l] += h;
      bwd[l] -= h;
      const double fd = (f.eval(fwd) - f.eval(bwd)) / (2.0 * h);
      const double an = f.partial_fn(x, l);
      const double scale = std::max({std::abs(an), std::abs(fd), 1.0});
      if (std::abs(an - fd) > 1e-5 * scale)
        fail(ErrorCode::Internal,
             "germ '" + f.name + "': gradient disagrees with finite differences");
    }
  }
}

}  // namespace zipfrac
