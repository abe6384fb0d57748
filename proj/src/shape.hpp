#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bernstein.hpp"
#include "germ.hpp"
#include "grid.hpp"
#include "scaling.hpp"
#include "surface.hpp"
#include "types.hpp"

namespace zipfrac {

// Intervals are stored closed and always strictly inside (-1,1); endpoints
// straying outside are clipped to +-kAlphaClip.
constexpr double kAlphaClip = 1.0 - 1e-9;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct CellExtrema {
  double min = 0.0;
  double max = 0.0;
  int grid_per_axis = 0;
};

// Sampled min/max of f(u_j(X)) over the domain, i.e. of f over cell j's
// image.
CellExtrema cell_extrema(const GermFunction& f, const Grid& grid,
                         const CellIndex& j, int grid_per_axis);

// Per-cell admissible scaling intervals keeping the fractal surface of a
// nonnegative germ nonnegative. c_n <= 0 picks the default
// 1.05*max(Phi_n, sup|f|) + 1e-9. Cells run lexicographic.
std::vector<Interval> positivity_intervals(const GermFunction& f,
                                           const Grid& grid,
                                           const BernsteinSpec& bernstein,
                                           double c_n, int grid_per_axis);

enum class DominanceMode {
  VsFunction,  // surface of f stays above the plain comparison function g
  Pairwise,    // surface of f stays above the surface of g (same maps/alpha)
};

std::vector<Interval> dominance_intervals(const GermFunction& f,
                                          const GermFunction& g,
                                          const Grid& grid,
                                          const std::vector<int>& degrees,
                                          DominanceMode mode,
                                          int grid_per_axis);

// Intervals keeping the surface nondecreasing along `axis` (0-based) for a
// germ nondecreasing in that coordinate.
std::vector<Interval> monotone_intervals(const GermFunction& f,
                                         const Grid& grid,
                                         const BernsteinSpec& bernstein,
                                         int axis, int grid_per_axis);

// Largest-magnitude constant in the intersection of all intervals,
// preferring a positive choice. Throws EmptyIntersection (naming the
// blocking cells) when the intersection is empty, or when it is {0} and
// `demand_nonzero` is set.
double pick_constant(const std::vector<Interval>& intervals,
                     const Grid& grid, bool demand_nonzero = false);

// Pullback field blending the interval midpoints: targets averaged onto the
// partition nodes, multilinear in between, halved up to 40 times until the
// sampled per-cell range fits inside every interval.
ScalingField pick_node_blend(const std::vector<Interval>& intervals,
                             const Grid& grid, int grid_per_axis = 65,
                             double tol = 1e-12);

struct VerifyResult {
  bool pass = true;
  double worst = 0.0;  // most negative value of the checked quantity
  std::vector<int> location;
};

VerifyResult verify_nonnegative(const FractalSurface& s, double tol = 1e-9);
VerifyResult verify_dominates(const FractalSurface& f_surface,
                              const FractalSurface& g_surface,
                              double tol = 1e-9);
VerifyResult verify_increasing(const FractalSurface& s, int axis,
                               double tol = 1e-9);

struct ConvexChainRow {
  int n_from = 0;
  int n_to = 0;
  double min_step = 0.0;  // min of surface_{n'} - surface_n over the grid
};

struct ConvexChainReport {
  bool pass = true;
  double worst_step = 0.0;  // most negative chain gap
  double worst_vs_f = 0.0;  // most negative of f - surface_n
  std::vector<ConvexChainRow> rows;
};

// One-sided approximation chain for a convex germ and nonnegative scaling:
// surfaces for the listed (scalar, broadcast) degrees must increase with the
// degree and stay below the germ.
ConvexChainReport convex_sequence_check(
    std::shared_ptr<const Grid> grid, const ScalingField& alpha,
    std::shared_ptr<const GermFunction> f, const std::vector<int>& n_list,
    int level, double tol = 1e-9);

}  // namespace zipfrac
