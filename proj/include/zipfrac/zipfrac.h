/* zipfrac: zipper fractal surfaces on Cartesian grids.
 *
 * C API of the shared library. All objects are opaque handles created and
 * destroyed here; every function returns a zf_status (or an exit code where
 * stated) and leaves a human-readable message in zf_last_error() on failure.
 * Points are double arrays of length m (the domain dimension), cell indices
 * are 1-based int arrays of length m, and multi-dimensional data is laid out
 * lexicographically with the last axis fastest.
 */
#ifndef ZIPFRAC_H
#define ZIPFRAC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct zf_grid zf_grid;           /* partition + signature + maps  */
typedef struct zf_germ zf_germ;           /* function being fractalized    */
typedef struct zf_scaling zf_scaling;     /* vertical scaling field        */
typedef struct zf_bernstein zf_bernstein; /* tensor Bernstein polynomial   */
typedef struct zf_surface zf_surface;     /* refined fractal surface       */

typedef enum {
  ZF_OK = 0,
  ZF_ERR_ARGUMENT = 1,
  ZF_ERR_DOMAIN = 2,
  ZF_ERR_CONFIG = 3,
  ZF_ERR_BUDGET = 4,
  ZF_ERR_EMPTY_INTERSECTION = 5,
  ZF_ERR_UNSUPPORTED = 6,
  ZF_ERR_RESOLUTION = 7,
  ZF_ERR_IO = 8,
  ZF_ERR_INTERNAL = 9
} zf_status;

/* Message for the most recent failure on this thread. */
const char* zf_last_error(void);
const char* zf_version(void);

/* Frees strings returned through char** out parameters. */
void zf_string_free(char* s);

/* ---- domain grid ------------------------------------------------------- */

/* nodes: per-axis node vectors, concatenated; node_counts[k] entries each.
 * signature: one 0/1 bit per axis. */
zf_status zf_grid_create(int dims, const double* nodes,
                         const int* node_counts, const int* signature,
                         zf_grid** out);
void zf_grid_free(zf_grid* g);

int zf_grid_dims(const zf_grid* g);
int zf_grid_cells(const zf_grid* g, int axis);

/* Node index reached by cell j's map at axis endpoint 0 or N_k. */
zf_status zf_grid_tau(const zf_grid* g, int axis, int j, int endpoint,
                      int* out);
zf_status zf_grid_map_coeffs(const zf_grid* g, int axis, int j,
                             double* slope, double* intercept);
zf_status zf_grid_apply(const zf_grid* g, const int* cell, const double* x,
                        double* out);
zf_status zf_grid_invert(const zf_grid* g, const int* cell, const double* x,
                         double* out);
zf_status zf_grid_locate(const zf_grid* g, const double* x, int* cell_out);
/* ok: 1 when every interior-node preimage pair agrees. */
zf_status zf_grid_check_join(const zf_grid* g, int* ok,
                             double* max_residual);

/* ---- germ functions ----------------------------------------------------- */

/* Built-in germs: "sinprod", "sqsum", "oneplussq", "affine". For "affine",
 * params points at c0 followed by m coefficients (or pass NULL for x1+..+xm).
 */
zf_status zf_germ_builtin(const char* name, int dims, const double* lo,
                          const double* hi, const double* params,
                          int param_count, zf_germ** out);
/* Tabulated data aligned with a grid's partition nodes; multilinear between
 * nodes. values has prod(N_k + 1) entries. */
zf_status zf_germ_tabulated(const zf_grid* grid, const double* values,
                            int64_t value_count, zf_germ** out);
/* CSV with header x1,...,xm,value, rows lexicographic by node index. */
zf_status zf_germ_from_csv(const char* path, zf_germ** out);
void zf_germ_free(zf_germ* f);

zf_status zf_germ_eval(const zf_germ* f, const double* x, double* out);
zf_status zf_germ_partial(const zf_germ* f, const double* x, int axis,
                          double* out);

/* ---- Bernstein operator ------------------------------------------------- */

zf_status zf_bernstein_create(const zf_germ* germ, const int* degrees,
                              zf_bernstein** out);
void zf_bernstein_free(zf_bernstein* b);

zf_status zf_bernstein_eval(const zf_bernstein* b, const double* x,
                            double* out);
zf_status zf_bernstein_partial(const zf_bernstein* b, const double* x,
                               int axis, double* out);
zf_status zf_bernstein_extrema(const zf_bernstein* b, int grid_per_axis,
                               double* min_out, double* max_out);
zf_status zf_bernstein_sup_error(const zf_bernstein* b, int grid_per_axis,
                                 double* out);
/* pass: 1 when every sampled pair satisfies |Bf(x)-Bf(y)| <= A |x-y|^beta
 * plus a 1e-9 slack. */
zf_status zf_bernstein_lipschitz(const zf_bernstein* b, double A, double beta,
                                 int trials, unsigned seed, double* max_ratio,
                                 int* pass);

/* ---- scaling fields ------------------------------------------------------ */

zf_status zf_scaling_constant(double c, zf_scaling** out);
/* Multilinear blend of per-node values (prod(N_k+1) entries). */
zf_status zf_scaling_nodeblend(const zf_grid* grid, const double* node_values,
                               zf_scaling** out);
/* Per-cell plateau blend (prod N_k entries); plateau in [0,1) controls how
 * much of each cell keeps the constant value before ramping. */
zf_status zf_scaling_cellblend(const zf_grid* grid, const double* cell_values,
                               double plateau, zf_scaling** out);
void zf_scaling_free(zf_scaling* s);

zf_status zf_scaling_alpha(const zf_scaling* s, const zf_grid* grid,
                           const int* cell, const double* x, double* out);
zf_status zf_scaling_sup(const zf_scaling* s, const zf_grid* grid,
                         int grid_per_axis, double* out);

/* ---- fractal surfaces ---------------------------------------------------- */

/* base_bernstein: Bernstein base of the germ with these degrees (length m);
 * pass NULL and a user_base germ instead for a user-supplied base. budget <= 0
 * uses the default of 2^24 stored values. */
zf_status zf_surface_build(const zf_grid* grid, const zf_scaling* alpha,
                           const zf_germ* germ, const int* base_bernstein,
                           const zf_germ* user_base, int level,
                           int64_t budget, zf_surface** out);
void zf_surface_free(zf_surface* s);

int zf_surface_level(const zf_surface* s);
int zf_surface_axis_points(const zf_surface* s, int axis);
zf_status zf_surface_axis_nodes(const zf_surface* s, int axis, double* out,
                                int64_t capacity);
int64_t zf_surface_value_count(const zf_surface* s);
zf_status zf_surface_values(const zf_surface* s, double* out,
                            int64_t capacity);
/* Value at a partition node (0-based node indices). */
zf_status zf_surface_node_value(const zf_surface* s, const int* node_idx,
                                double* out);
zf_status zf_surface_boundary_discrepancy(const zf_surface* s, double* out);
/* Max self-referential residual; samples <= 0 sweeps every pair. */
zf_status zf_surface_residual(const zf_surface* s, int64_t samples,
                              unsigned seed, double* out);
/* Depth-d point query with its error bound. */
zf_status zf_surface_query(const zf_surface* s, const double* x, int depth,
                           double* value, double* bound);
zf_status zf_surface_perturbation_bound(const zf_surface* s,
                                        int grid_per_axis, double* out);
zf_status zf_surface_write_csv(const zf_surface* s, const char* path);
/* Diagnostics hook: perturbs one stored value. */
zf_status zf_surface_corrupt(zf_surface* s, int64_t flat_index, double delta);

/* ---- shape-preserving scaling ------------------------------------------- */

/* Out arrays hold one entry per cell, lexicographic. c_n <= 0 uses the
 * default cap. */
zf_status zf_shape_positivity(const zf_grid* grid, const zf_germ* germ,
                              const zf_bernstein* bernstein, double c_n,
                              int grid_per_axis, double* lo_out,
                              double* hi_out);
/* mode: 0 = the surface of f dominates the plain function g,
 *       1 = it dominates g's surface built with the same maps/scaling. */
zf_status zf_shape_dominance(const zf_grid* grid, const zf_germ* f,
                             const zf_germ* g, const int* degrees, int mode,
                             int grid_per_axis, double* lo_out,
                             double* hi_out);
zf_status zf_shape_monotone(const zf_grid* grid, const zf_germ* germ,
                            const zf_bernstein* bernstein, int axis,
                            int grid_per_axis, double* lo_out,
                            double* hi_out);
zf_status zf_shape_cell_extrema(const zf_grid* grid, const zf_germ* germ,
                                const int* cell, int grid_per_axis,
                                double* min_out, double* max_out);
/* Largest-magnitude constant admissible for every cell (positive preferred).
 */
zf_status zf_shape_pick_constant(const zf_grid* grid, const double* lo,
                                 const double* hi, double* out);
zf_status zf_shape_pick_nodeblend(const zf_grid* grid, const double* lo,
                                  const double* hi, int grid_per_axis,
                                  zf_scaling** out);
/* predicate: 0 nonnegative, 1 dominates `other`, 2 increasing along `axis`.
 */
zf_status zf_shape_verify(const zf_surface* s, int predicate,
                          const zf_surface* other, int axis, double tol,
                          double* worst, int* pass);

/* ---- box dimension -------------------------------------------------------- */

zf_status zf_dim_gamma(const zf_scaling* alpha, const zf_grid* grid,
                       int grid_per_axis, double* gamma, int* extended);
/* which: 1, 2 or 3; lower is always m. */
zf_status zf_dim_theory(double gamma, double xi, int m, const int* cells,
                        int* which, double* lower, double* upper);
zf_status zf_dim_box_count(const zf_surface* s, int r, int64_t* count);
/* Full report as JSON (free with zf_string_free). xi overrides <= 0 use the
 * germ/base metadata. */
zf_status zf_dim_report(const zf_surface* s, double xi1, double xi2,
                        int r_min, int r_max, char** json_out);

/* ---- config-driven runner ------------------------------------------------- */

/* Runs a CLI subcommand (build | interp | bernstein | convergence | shape |
 * dim | verify) against a JSON config document, writing outputs under
 * out_dir. Returns the process exit code (0 ok, 1 check failed, 2 config
 * error, 3 budget, 4 empty intersection, 5 unsupported); the summary JSON is
 * always produced. */
int zf_run(const char* subcommand, const char* config_json,
           const char* out_dir, char** summary_json_out);

#ifdef __cplusplus
}
#endif

#endif /* ZIPFRAC_H */
