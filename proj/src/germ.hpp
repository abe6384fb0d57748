#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grid.hpp"
#include "types.hpp"

namespace zipfrac {

// The function being fractalized (and comparison functions g). Total on its
// domain box; gradient and smoothness metadata optional.
struct GermFunction {
  std::string name;
  Box domain;
  std::function<double(const Point&)> eval_fn;
  // Partial derivative along one axis; empty when only finite differences
  // are available.
  std::function<double(const Point&, int)> partial_fn;
  std::optional<double> holder_exponent;  // xi in (0,1]
  std::optional<double> holder_constant;  // A >= 0
  bool convex = false;

  double eval(const Point& x) const;
  // Analytic partial when present, otherwise central differences with step
  // 1e-6 * axis length (one-sided at the boundary).
  double partial(const Point& x, int axis) const;
  bool has_gradient() const { return static_cast<bool>(partial_fn); }
};

// Partition-aligned tensor of samples, lexicographic by node index with the
// last axis fastest.
struct TabulatedGrid {
  std::vector<std::vector<double>> nodes;  // per-axis node vectors
  std::vector<double> values;              // size = prod(nodes[k].size())

  std::vector<int> shape() const;
  void validate() const;
  double at(const std::vector<int>& idx) const;
};

// Multilinear extension of tabulated data; exact at the nodes.
GermFunction lift_tabulated(const TabulatedGrid& data);

// Built-in germs. Supported names:
//   sinprod   sin(pi/2 * x_1...x_m)
//   sqsum     x_1^2 + ... + x_m^2
//   oneplussq 1 + sqsum
//   affine    c0 + sum c_k x_k   (params: c0, coeffs)
struct AffineParams {
  double c0 = 0.0;
  std::vector<double> coeffs;  // broadcast 1.0 per axis when empty
};
GermFunction make_builtin_germ(const std::string& name, const Box& domain,
                               const AffineParams& affine = {});
std::vector<std::string> builtin_germ_names();

// Checks an analytic gradient against central differences at random interior
// points; throws ErrorCode::Internal on mismatch beyond 1e-5 relative.
void validate_gradient(const GermFunction& f, int points, unsigned seed);

}  // namespace zipfrac
