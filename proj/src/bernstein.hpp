#pragma once

#include <memory>
#include <vector>

#include "germ.hpp"
#include "types.hpp"

namespace zipfrac {

struct LipschitzReport {
  bool pass = true;
  double max_ratio = 0.0;   // max |Bf(X)-Bf(Y)| / (A dist^beta), over trials
  double worst_excess = 0.0;  // max violation beyond the 1e-9 slack
  int trials = 0;
};

// Tensor-product Bernstein polynomial of a germ on its domain box. The
// coefficient tensor (germ values at the degree-fraction lattice) is built
// once at construction; evaluation and the exact partial derivatives share
// it. Immutable afterwards.
class BernsteinSpec {
public:
  static constexpr int kMaxDegree = 200;

  BernsteinSpec(std::shared_ptr<const GermFunction> germ,
                std::vector<int> degrees);

  const std::vector<int>& degrees() const { return degrees_; }
  const Box& domain() const { return domain_; }
  const GermFunction& germ() const { return *germ_; }

  double eval(const Point& x) const;
  double partial(const Point& x, int axis) const;

  // Sampled min/max over a uniform grid (boundary faces included).
  std::pair<double, double> extrema(int grid_per_axis) const;
  // Sampled sup |f - B_n f| over the same grid.
  double sup_error(int grid_per_axis) const;

  LipschitzReport verify_lipschitz(double A, double beta, int trials,
                                   unsigned seed) const;

  // All univariate basis values b_{0..n,n} at x within [lo,hi], summing to 1.
  static std::vector<double> basis(int n, double x, double lo, double hi);

private:
  std::shared_ptr<const GermFunction> germ_;
  std::vector<int> degrees_;
  Box domain_;
  std::vector<int> coeff_shape_;   // degrees + 1
  std::vector<double> coeffs_;     // germ at the lattice points
};

}  // namespace zipfrac
