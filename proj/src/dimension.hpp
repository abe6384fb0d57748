#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scaling.hpp"
#include "surface.hpp"
#include "types.hpp"

namespace zipfrac {

struct GammaResult {
  double value = 0.0;
  // Set when the per-cell sups of a pullback field stand in for the
  // constant-scaling hypothesis of the dimension bounds.
  bool extended_hypothesis = false;
};

// Sum of the per-cell |alpha| sups.
GammaResult dimension_gamma(const ScalingField& alpha, const Grid& grid,
                            int grid_per_axis = 65);

enum class DimensionCase { I = 1, II = 2, III = 3 };

struct TheoryBounds {
  DimensionCase which = DimensionCase::I;
  double lower = 0.0;  // always the domain dimension m
  double upper = 0.0;
};

TheoryBounds theory_bounds(double gamma, double xi, int m,
                           const std::vector<int>& cells_per_axis);

// Vertical box count at scale index r: the domain is tiled by columns of
// side (prod N_k)^-r and each column contributes
// floor(max/delta) - floor(min/delta) + 1 over the samples it contains.
// Needs a uniform partition of [0,1]^m and at least 4 samples per column
// side.
std::int64_t box_count(const FractalSurface& surface, int r);

struct ScaleRow {
  int r = 0;
  double delta = 0.0;
  std::int64_t count = 0;
};

struct SlopeFit {
  double slope = 0.0;
  double residual = 0.0;  // max |log count - fit| over the rows
};

// Least-squares slope of log N(r) against r*log(prod N_k).
SlopeFit estimate_dimension(const std::vector<ScaleRow>& rows,
                            double log_prod_n);

struct DimensionReport {
  double gamma = 0.0;
  double xi1 = 0.0;
  double xi2 = 0.0;
  double xi = 0.0;
  TheoryBounds bounds;
  std::vector<ScaleRow> scales;
  SlopeFit fit;
  std::vector<std::string> flags;
};

// xi overrides <= 0 fall back to the germ / base metadata.
DimensionReport dimension_report(const FractalSurface& surface, double xi1,
                                 double xi2, int r_min, int r_max,
                                 int gamma_grid_per_axis = 65);

}  // namespace zipfrac
