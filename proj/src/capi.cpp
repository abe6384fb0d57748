#include "zipfrac/zipfrac.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include <json.hpp>

#include "bernstein.hpp"
#include "commands.hpp"
#include "csvio.hpp"
#include "dimension.hpp"
#include "germ.hpp"
#include "grid.hpp"
#include "scaling.hpp"
#include "shape.hpp"
#include "surface.hpp"
#include "types.hpp"

using namespace zipfrac;

struct zf_grid {
  std::shared_ptr<const Grid> impl;
};
struct zf_germ {
  std::shared_ptr<const GermFunction> impl;
};
struct zf_scaling {
  ScalingField impl;
};
struct zf_bernstein {
  std::shared_ptr<const BernsteinSpec> impl;
};
struct zf_surface {
  std::unique_ptr<FractalSurface> impl;
};

namespace {

thread_local std::string g_last_error;

zf_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Argument: return ZF_ERR_ARGUMENT;
    case ErrorCode::Domain: return ZF_ERR_DOMAIN;
    case ErrorCode::Config: return ZF_ERR_CONFIG;
    case ErrorCode::Budget: return ZF_ERR_BUDGET;
    case ErrorCode::EmptyIntersection: return ZF_ERR_EMPTY_INTERSECTION;
    case ErrorCode::Unsupported: return ZF_ERR_UNSUPPORTED;
    case ErrorCode::Resolution: return ZF_ERR_RESOLUTION;
    case ErrorCode::Io: return ZF_ERR_IO;
    default: return ZF_ERR_INTERNAL;
  }
}

template <typename F>
zf_status wrap(F&& body) {
  try {
    body();
    return ZF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ZF_ERR_INTERNAL;
  }
}

Point to_point(const double* x, int m) { return Point(x, x + m); }
CellIndex to_cell(const int* j, int m) { return CellIndex(j, j + m); }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool cond, const char* what) {
  if (!cond) fail(ErrorCode::Argument, what);
}

void copy_intervals(const std::vector<Interval>& iv, double* lo, double* hi) {
  for (size_t i = 0; i < iv.size(); ++i) {
    lo[i] = iv[i].lo;
    hi[i] = iv[i].hi;
  }
}

}  // namespace

extern "C" {

const char* zf_last_error(void) { return g_last_error.c_str(); }
const char* zf_version(void) { return "0.1.0"; }
void zf_string_free(char* s) { std::free(s); }

/* ---- grid ---- */

zf_status zf_grid_create(int dims, const double* nodes,
                         const int* node_counts, const int* signature,
                         zf_grid** out) {
  return wrap([&] {
    require(dims >= 1 && nodes && node_counts && signature && out,
            "null argument to zf_grid_create");
    std::vector<std::vector<double>> axes(dims);
    const double* p = nodes;
    for (int k = 0; k < dims; ++k) {
      axes[k].assign(p, p + node_counts[k]);
      p += node_counts[k];
    }
    std::vector<int> sig(signature, signature + dims);
    *out = new zf_grid{std::make_shared<Grid>(std::move(axes), std::move(sig))};
  });
}

void zf_grid_free(zf_grid* g) { delete g; }
int zf_grid_dims(const zf_grid* g) { return g ? g->impl->dims() : 0; }
int zf_grid_cells(const zf_grid* g, int axis) {
  return g && axis >= 0 && axis < g->impl->dims() ? g->impl->cells(axis) : 0;
}

zf_status zf_grid_tau(const zf_grid* g, int axis, int j, int endpoint,
                      int* out) {
  return wrap([&] {
    require(g && out && axis >= 0 && axis < g->impl->dims(), "bad arguments");
    *out = Grid::tau(j, endpoint, g->impl->cells(axis),
                     g->impl->signature(axis));
  });
}

zf_status zf_grid_map_coeffs(const zf_grid* g, int axis, int j, double* slope,
                             double* intercept) {
  return wrap([&] {
    require(g && slope && intercept && axis >= 0 && axis < g->impl->dims(),
            "bad arguments");
    require(j >= 1 && j <= g->impl->cells(axis), "cell index out of range");
    *slope = g->impl->slope(axis, j);
    *intercept = g->impl->intercept(axis, j);
  });
}

zf_status zf_grid_apply(const zf_grid* g, const int* cell, const double* x,
                        double* out) {
  return wrap([&] {
    require(g && cell && x && out, "bad arguments");
    const int m = g->impl->dims();
    const Point y = g->impl->apply(to_cell(cell, m), to_point(x, m));
    std::copy(y.begin(), y.end(), out);
  });
}

zf_status zf_grid_invert(const zf_grid* g, const int* cell, const double* x,
                         double* out) {
  return wrap([&] {
    require(g && cell && x && out, "bad arguments");
    const int m = g->impl->dims();
    const Point y = g->impl->invert(to_cell(cell, m), to_point(x, m));
    std::copy(y.begin(), y.end(), out);
  });
}

zf_status zf_grid_locate(const zf_grid* g, const double* x, int* cell_out) {
  return wrap([&] {
    require(g && x && cell_out, "bad arguments");
    const CellIndex j = g->impl->locate(to_point(x, g->impl->dims()));
    std::copy(j.begin(), j.end(), cell_out);
  });
}

zf_status zf_grid_check_join(const zf_grid* g, int* ok, double* max_residual) {
  return wrap([&] {
    require(g && ok && max_residual, "bad arguments");
    const JoinReport r = g->impl->check_join();
    *ok = r.ok ? 1 : 0;
    *max_residual = r.max_residual;
  });
}

/* ---- germ ---- */

zf_status zf_germ_builtin(const char* name, int dims, const double* lo,
                          const double* hi, const double* params,
                          int param_count, zf_germ** out) {
  return wrap([&] {
    require(name && lo && hi && out && dims >= 1, "bad arguments");
    Box box;
    box.lo.assign(lo, lo + dims);
    box.hi.assign(hi, hi + dims);
    AffineParams ap;
    if (params && param_count > 0) {
      ap.c0 = params[0];
      ap.coeffs.assign(params + 1, params + param_count);
    }
    *out = new zf_germ{
        std::make_shared<GermFunction>(make_builtin_germ(name, box, ap))};
  });
}

zf_status zf_germ_tabulated(const zf_grid* grid, const double* values,
                            int64_t value_count, zf_germ** out) {
  return wrap([&] {
    require(grid && values && out, "bad arguments");
    TabulatedGrid tab;
    for (int k = 0; k < grid->impl->dims(); ++k)
      tab.nodes.push_back(grid->impl->nodes(k));
    tab.values.assign(values, values + value_count);
    *out = new zf_germ{std::make_shared<GermFunction>(lift_tabulated(tab))};
  });
}

zf_status zf_germ_from_csv(const char* path, zf_germ** out) {
  return wrap([&] {
    require(path && out, "bad arguments");
    *out = new zf_germ{
        std::make_shared<GermFunction>(lift_tabulated(read_grid_csv(path)))};
  });
}

void zf_germ_free(zf_germ* f) { delete f; }

zf_status zf_germ_eval(const zf_germ* f, const double* x, double* out) {
  return wrap([&] {
    require(f && x && out, "bad arguments");
    *out = f->impl->eval(to_point(x, f->impl->domain.dims()));
  });
}

zf_status zf_germ_partial(const zf_germ* f, const double* x, int axis,
                          double* out) {
  return wrap([&] {
    require(f && x && out, "bad arguments");
    *out = f->impl->partial(to_point(x, f->impl->domain.dims()), axis);
  });
}

/* ---- Bernstein ---- */

zf_status zf_bernstein_create(const zf_germ* germ, const int* degrees,
                              zf_bernstein** out) {
  return wrap([&] {
    require(germ && degrees && out, "bad arguments");
    std::vector<int> deg(degrees, degrees + germ->impl->domain.dims());
    *out = new zf_bernstein{
        std::make_shared<BernsteinSpec>(germ->impl, std::move(deg))};
  });
}

void zf_bernstein_free(zf_bernstein* b) { delete b; }

zf_status zf_bernstein_eval(const zf_bernstein* b, const double* x,
                            double* out) {
  return wrap([&] {
    require(b && x && out, "bad arguments");
    *out = b->impl->eval(to_point(x, b->impl->domain().dims()));
  });
}

zf_status zf_bernstein_partial(const zf_bernstein* b, const double* x,
                               int axis, double* out) {
  return wrap([&] {
    require(b && x && out, "bad arguments");
    *out = b->impl->partial(to_point(x, b->impl->domain().dims()), axis);
  });
}

zf_status zf_bernstein_extrema(const zf_bernstein* b, int grid_per_axis,
                               double* min_out, double* max_out) {
  return wrap([&] {
    require(b && min_out && max_out, "bad arguments");
    const auto [mn, mx] = b->impl->extrema(grid_per_axis);
    *min_out = mn;
    *max_out = mx;
  });
}

zf_status zf_bernstein_sup_error(const zf_bernstein* b, int grid_per_axis,
                                 double* out) {
  return wrap([&] {
    require(b && out, "bad arguments");
    *out = b->impl->sup_error(grid_per_axis);
  });
}

zf_status zf_bernstein_lipschitz(const zf_bernstein* b, double A, double beta,
                                 int trials, unsigned seed, double* max_ratio,
                                 int* pass) {
  return wrap([&] {
    require(b && max_ratio && pass, "bad arguments");
    const LipschitzReport r = b->impl->verify_lipschitz(A, beta, trials, seed);
    *max_ratio = r.max_ratio;
    *pass = r.pass ? 1 : 0;
  });
}

/* ---- scaling ---- */

zf_status zf_scaling_constant(double c, zf_scaling** out) {
  return wrap([&] {
    require(out != nullptr, "bad arguments");
    *out = new zf_scaling{ScalingField::constant(c)};
  });
}

zf_status zf_scaling_nodeblend(const zf_grid* grid, const double* node_values,
                               zf_scaling** out) {
  return wrap([&] {
    require(grid && node_values && out, "bad arguments");
    std::int64_t count = 1;
    for (int k = 0; k < grid->impl->dims(); ++k)
      count *= grid->impl->cells(k) + 1;
    *out = new zf_scaling{ScalingField::node_blend(
        *grid->impl, std::vector<double>(node_values, node_values + count))};
  });
}

zf_status zf_scaling_cellblend(const zf_grid* grid, const double* cell_values,
                               double plateau, zf_scaling** out) {
  return wrap([&] {
    require(grid && cell_values && out, "bad arguments");
    const std::int64_t count = grid->impl->cell_count();
    *out = new zf_scaling{ScalingField::cell_blend(
        *grid->impl, std::vector<double>(cell_values, cell_values + count),
        plateau)};
  });
}

void zf_scaling_free(zf_scaling* s) { delete s; }

zf_status zf_scaling_alpha(const zf_scaling* s, const zf_grid* grid,
                           const int* cell, const double* x, double* out) {
  return wrap([&] {
    require(s && grid && cell && x && out, "bad arguments");
    const int m = grid->impl->dims();
    *out = s->impl.alpha(*grid->impl, to_cell(cell, m), to_point(x, m));
  });
}

zf_status zf_scaling_sup(const zf_scaling* s, const zf_grid* grid,
                         int grid_per_axis, double* out) {
  return wrap([&] {
    require(s && grid && out, "bad arguments");
    *out = s->impl.sup_abs(*grid->impl, grid_per_axis);
  });
}

/* ---- surface ---- */

zf_status zf_surface_build(const zf_grid* grid, const zf_scaling* alpha,
                           const zf_germ* germ, const int* base_bernstein,
                           const zf_germ* user_base, int level, int64_t budget,
                           zf_surface** out) {
  return wrap([&] {
    require(grid && alpha && germ && out, "bad arguments");
    require((base_bernstein != nullptr) != (user_base != nullptr),
            "pass exactly one of base_bernstein and user_base");
    BaseFunction base =
        base_bernstein
            ? BaseFunction::bernstein(std::make_shared<BernsteinSpec>(
                  germ->impl,
                  std::vector<int>(base_bernstein,
                                   base_bernstein + grid->impl->dims())))
            : BaseFunction::user(user_base->impl);
    *out = new zf_surface{std::make_unique<FractalSurface>(
        grid->impl, alpha->impl, germ->impl, std::move(base), level,
        budget > 0 ? budget : kDefaultValueBudget)};
  });
}

void zf_surface_free(zf_surface* s) { delete s; }

int zf_surface_level(const zf_surface* s) { return s ? s->impl->level() : -1; }

int zf_surface_axis_points(const zf_surface* s, int axis) {
  if (!s || axis < 0 || axis >= s->impl->grid().dims()) return 0;
  return static_cast<int>(s->impl->axis_nodes(axis).size());
}

zf_status zf_surface_axis_nodes(const zf_surface* s, int axis, double* out,
                                int64_t capacity) {
  return wrap([&] {
    require(s && out && axis >= 0 && axis < s->impl->grid().dims(),
            "bad arguments");
    const auto& xs = s->impl->axis_nodes(axis);
    require(capacity >= static_cast<int64_t>(xs.size()), "buffer too small");
    std::copy(xs.begin(), xs.end(), out);
  });
}

int64_t zf_surface_value_count(const zf_surface* s) {
  return s ? static_cast<int64_t>(s->impl->values().size()) : 0;
}

zf_status zf_surface_values(const zf_surface* s, double* out,
                            int64_t capacity) {
  return wrap([&] {
    require(s && out, "bad arguments");
    const auto& v = s->impl->values();
    require(capacity >= static_cast<int64_t>(v.size()), "buffer too small");
    std::copy(v.begin(), v.end(), out);
  });
}

zf_status zf_surface_node_value(const zf_surface* s, const int* node_idx,
                                double* out) {
  return wrap([&] {
    require(s && node_idx && out, "bad arguments");
    std::vector<int> idx(node_idx, node_idx + s->impl->grid().dims());
    *out = s->impl->node_value(idx);
  });
}

zf_status zf_surface_boundary_discrepancy(const zf_surface* s, double* out) {
  return wrap([&] {
    require(s && out, "bad arguments");
    *out = s->impl->boundary_discrepancy();
  });
}

zf_status zf_surface_residual(const zf_surface* s, int64_t samples,
                              unsigned seed, double* out) {
  return wrap([&] {
    require(s && out, "bad arguments");
    *out = s->impl->residual_check(samples, seed);
  });
}

zf_status zf_surface_query(const zf_surface* s, const double* x, int depth,
                           double* value, double* bound) {
  return wrap([&] {
    require(s && x && value && bound, "bad arguments");
    const QueryResult q =
        s->impl->query(to_point(x, s->impl->grid().dims()), depth);
    *value = q.value;
    *bound = q.error_bound;
  });
}

zf_status zf_surface_perturbation_bound(const zf_surface* s,
                                        int grid_per_axis, double* out) {
  return wrap([&] {
    require(s && out, "bad arguments");
    *out = s->impl->perturbation_bound(grid_per_axis);
  });
}

zf_status zf_surface_write_csv(const zf_surface* s, const char* path) {
  return wrap([&] {
    require(s && path, "bad arguments");
    s->impl->write_csv(path);
  });
}

zf_status zf_surface_corrupt(zf_surface* s, int64_t flat_index, double delta) {
  return wrap([&] {
    require(s != nullptr, "bad arguments");
    s->impl->corrupt(flat_index, delta);
  });
}

/* ---- shape ---- */

zf_status zf_shape_positivity(const zf_grid* grid, const zf_germ* germ,
                              const zf_bernstein* bernstein, double c_n,
                              int grid_per_axis, double* lo_out,
                              double* hi_out) {
  return wrap([&] {
    require(grid && germ && bernstein && lo_out && hi_out, "bad arguments");
    copy_intervals(positivity_intervals(*germ->impl, *grid->impl,
                                        *bernstein->impl, c_n, grid_per_axis),
                   lo_out, hi_out);
  });
}

zf_status zf_shape_dominance(const zf_grid* grid, const zf_germ* f,
                             const zf_germ* g, const int* degrees, int mode,
                             int grid_per_axis, double* lo_out,
                             double* hi_out) {
  return wrap([&] {
    require(grid && f && g && degrees && lo_out && hi_out, "bad arguments");
    std::vector<int> deg(degrees, degrees + grid->impl->dims());
    copy_intervals(
        dominance_intervals(*f->impl, *g->impl, *grid->impl, deg,
                            mode == 0 ? DominanceMode::VsFunction
                                      : DominanceMode::Pairwise,
                            grid_per_axis),
        lo_out, hi_out);
  });
}

zf_status zf_shape_monotone(const zf_grid* grid, const zf_germ* germ,
                            const zf_bernstein* bernstein, int axis,
                            int grid_per_axis, double* lo_out,
                            double* hi_out) {
  return wrap([&] {
    require(grid && germ && bernstein && lo_out && hi_out, "bad arguments");
    copy_intervals(monotone_intervals(*germ->impl, *grid->impl,
                                      *bernstein->impl, axis, grid_per_axis),
                   lo_out, hi_out);
  });
}

zf_status zf_shape_cell_extrema(const zf_grid* grid, const zf_germ* germ,
                                const int* cell, int grid_per_axis,
                                double* min_out, double* max_out) {
  return wrap([&] {
    require(grid && germ && cell && min_out && max_out, "bad arguments");
    const CellExtrema e =
        cell_extrema(*germ->impl, *grid->impl,
                     to_cell(cell, grid->impl->dims()), grid_per_axis);
    *min_out = e.min;
    *max_out = e.max;
  });
}

zf_status zf_shape_pick_constant(const zf_grid* grid, const double* lo,
                                 const double* hi, double* out) {
  return wrap([&] {
    require(grid && lo && hi && out, "bad arguments");
    const std::int64_t cells = grid->impl->cell_count();
    std::vector<Interval> iv(cells);
    for (std::int64_t i = 0; i < cells; ++i) iv[i] = {lo[i], hi[i]};
    *out = pick_constant(iv, *grid->impl);
  });
}

zf_status zf_shape_pick_nodeblend(const zf_grid* grid, const double* lo,
                                  const double* hi, int grid_per_axis,
                                  zf_scaling** out) {
  return wrap([&] {
    require(grid && lo && hi && out, "bad arguments");
    const std::int64_t cells = grid->impl->cell_count();
    std::vector<Interval> iv(cells);
    for (std::int64_t i = 0; i < cells; ++i) iv[i] = {lo[i], hi[i]};
    *out = new zf_scaling{pick_node_blend(iv, *grid->impl, grid_per_axis)};
  });
}

zf_status zf_shape_verify(const zf_surface* s, int predicate,
                          const zf_surface* other, int axis, double tol,
                          double* worst, int* pass) {
  return wrap([&] {
    require(s && worst && pass, "bad arguments");
    VerifyResult r;
    if (predicate == 0) {
      r = verify_nonnegative(*s->impl, tol);
    } else if (predicate == 1) {
      require(other != nullptr, "dominance check needs the other surface");
      r = verify_dominates(*s->impl, *other->impl, tol);
    } else if (predicate == 2) {
      r = verify_increasing(*s->impl, axis, tol);
    } else {
      fail(ErrorCode::Argument, "unknown predicate");
    }
    *worst = r.worst;
    *pass = r.pass ? 1 : 0;
  });
}

/* ---- dimension ---- */

zf_status zf_dim_gamma(const zf_scaling* alpha, const zf_grid* grid,
                       int grid_per_axis, double* gamma, int* extended) {
  return wrap([&] {
    require(alpha && grid && gamma && extended, "bad arguments");
    const GammaResult g =
        dimension_gamma(alpha->impl, *grid->impl, grid_per_axis);
    *gamma = g.value;
    *extended = g.extended_hypothesis ? 1 : 0;
  });
}

zf_status zf_dim_theory(double gamma, double xi, int m, const int* cells,
                        int* which, double* lower, double* upper) {
  return wrap([&] {
    require(cells && which && lower && upper, "bad arguments");
    const TheoryBounds b =
        theory_bounds(gamma, xi, m, std::vector<int>(cells, cells + m));
    *which = static_cast<int>(b.which);
    *lower = b.lower;
    *upper = b.upper;
  });
}

zf_status zf_dim_box_count(const zf_surface* s, int r, int64_t* count) {
  return wrap([&] {
    require(s && count, "bad arguments");
    *count = box_count(*s->impl, r);
  });
}

zf_status zf_dim_report(const zf_surface* s, double xi1, double xi2, int r_min,
                        int r_max, char** json_out) {
  return wrap([&] {
    require(s && json_out, "bad arguments");
    const DimensionReport report =
        dimension_report(*s->impl, xi1, xi2, r_min, r_max);
    nlohmann::json j;
    j["gamma"] = report.gamma;
    j["xi"] = report.xi;
    j["case"] = report.bounds.which == DimensionCase::I
                    ? "i"
                    : report.bounds.which == DimensionCase::II ? "ii" : "iii";
    j["lower"] = report.bounds.lower;
    j["upper"] = report.bounds.upper;
    nlohmann::json scales = nlohmann::json::array();
    for (const auto& row : report.scales)
      scales.push_back(
          {{"r", row.r}, {"delta", row.delta}, {"count", row.count}});
    j["scales"] = scales;
    j["slope"] = report.fit.slope;
    j["residual"] = report.fit.residual;
    j["flags"] = report.flags;
    *json_out = dup_string(j.dump(2));
  });
}

/* ---- runner ---- */

int zf_run(const char* subcommand, const char* config_json,
           const char* out_dir, char** summary_json_out) {
  if (!subcommand || !config_json || !out_dir) {
    g_last_error = "null argument to zf_run";
    return 2;
  }
  const CommandResult r = run_command(subcommand, config_json, out_dir);
  if (summary_json_out) *summary_json_out = dup_string(r.summary_json);
  if (r.exit_code != 0) g_last_error = r.summary_json;
  return r.exit_code;
}

}  // extern "C"
