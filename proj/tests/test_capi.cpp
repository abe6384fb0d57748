// Exercises the shared library through its C surface only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "zipfrac/zipfrac.h"

namespace {

namespace fs = std::filesystem;

struct GridHandle {
  zf_grid* g = nullptr;
  ~GridHandle() { zf_grid_free(g); }
};

zf_grid* make_half_grid() {
  const double nodes[] = {0.0, 0.5, 1.0};
  const int counts[] = {3};
  const int sig[] = {0};
  zf_grid* g = nullptr;
  REQUIRE(zf_grid_create(1, nodes, counts, sig, &g) == ZF_OK);
  return g;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("grid round trip through the C surface") {
  GridHandle h{make_half_grid()};
  CHECK(zf_grid_dims(h.g) == 1);
  CHECK(zf_grid_cells(h.g, 0) == 2);

  int tau = -1;
  CHECK(zf_grid_tau(h.g, 0, 1, 0, &tau) == ZF_OK);
  CHECK(tau == 0);
  CHECK(zf_grid_tau(h.g, 0, 2, 0, &tau) == ZF_OK);
  CHECK(tau == 2);
  CHECK(zf_grid_tau(h.g, 0, 7, 0, &tau) == ZF_ERR_ARGUMENT);
  CHECK(std::strlen(zf_last_error()) > 0);

  double a = 0, b = 0;
  CHECK(zf_grid_map_coeffs(h.g, 0, 2, &a, &b) == ZF_OK);
  CHECK(a == doctest::Approx(-0.5));
  CHECK(b == doctest::Approx(1.0));

  const int cell[] = {2};
  const double x[] = {0.5};
  double y[1];
  CHECK(zf_grid_apply(h.g, cell, x, y) == ZF_OK);
  CHECK(y[0] == doctest::Approx(0.75));
  double back[1];
  CHECK(zf_grid_invert(h.g, cell, y, back) == ZF_OK);
  CHECK(back[0] == doctest::Approx(0.5));

  int located[1];
  const double q[] = {0.5};
  CHECK(zf_grid_locate(h.g, q, located) == ZF_OK);
  CHECK(located[0] == 1);
  const double outside[] = {1.5};
  CHECK(zf_grid_locate(h.g, outside, located) == ZF_ERR_DOMAIN);

  int ok = 0;
  double res = 1.0;
  CHECK(zf_grid_check_join(h.g, &ok, &res) == ZF_OK);
  CHECK(ok == 1);
  CHECK(res <= 1e-12);

  // degenerate grid is rejected at creation
  const double bad_nodes[] = {0.0, 1.0};
  const int bad_counts[] = {2};
  const int bad_sig[] = {0};
  zf_grid* bad = nullptr;
  CHECK(zf_grid_create(1, bad_nodes, bad_counts, bad_sig, &bad) ==
        ZF_ERR_ARGUMENT);
}

TEST_CASE("germ and Bernstein handles") {
  const double lo[] = {0.0, 0.0}, hi[] = {1.0, 1.0};
  zf_germ* f = nullptr;
  REQUIRE(zf_germ_builtin("sinprod", 2, lo, hi, nullptr, 0, &f) == ZF_OK);
  double v = 0;
  const double at[] = {1.0, 1.0};
  CHECK(zf_germ_eval(f, at, &v) == ZF_OK);
  CHECK(v == doctest::Approx(1.0));
  CHECK(zf_germ_partial(f, at, 0, &v) == ZF_OK);
  CHECK(std::abs(v) <= 1e-12);

  zf_germ* nope = nullptr;
  CHECK(zf_germ_builtin("nope", 2, lo, hi, nullptr, 0, &nope) ==
        ZF_ERR_CONFIG);

  const int degrees[] = {3, 3};
  zf_bernstein* bn = nullptr;
  REQUIRE(zf_bernstein_create(f, degrees, &bn) == ZF_OK);
  const double mid[] = {0.5, 0.5};
  CHECK(zf_bernstein_eval(bn, mid, &v) == ZF_OK);
  double mn = 0, mx = 0;
  CHECK(zf_bernstein_extrema(bn, 65, &mn, &mx) == ZF_OK);
  CHECK(mn >= -1e-12);
  CHECK(mx <= 1.0 + 1e-12);
  double ratio = 0;
  int pass = 0;
  CHECK(zf_bernstein_lipschitz(bn, 3.15 / std::sqrt(2.0), 1.0, 5000, 7,
                               &ratio, &pass) == ZF_OK);
  CHECK(pass == 1);
  zf_bernstein_free(bn);
  zf_germ_free(f);
}

TEST_CASE("surface lifecycle via the C surface") {
  GridHandle h{make_half_grid()};
  const double lo[] = {0.0}, hi[] = {1.0};
  zf_germ* f = nullptr;
  REQUIRE(zf_germ_builtin("oneplussq", 1, lo, hi, nullptr, 0, &f) == ZF_OK);
  zf_scaling* a = nullptr;
  REQUIRE(zf_scaling_constant(0.4, &a) == ZF_OK);

  const int degrees[] = {2};
  zf_surface* s = nullptr;
  REQUIRE(zf_surface_build(h.g, a, f, degrees, nullptr, 5, 0, &s) == ZF_OK);
  CHECK(zf_surface_level(s) == 5);
  CHECK(zf_surface_axis_points(s, 0) == 65);
  CHECK(zf_surface_value_count(s) == 65);

  const int node[] = {1};
  double v = 0;
  CHECK(zf_surface_node_value(s, node, &v) == ZF_OK);
  CHECK(v == doctest::Approx(1.25).epsilon(1e-12));

  std::vector<double> values(65), axis(65);
  CHECK(zf_surface_values(s, values.data(), 65) == ZF_OK);
  CHECK(zf_surface_axis_nodes(s, 0, axis.data(), 65) == ZF_OK);
  CHECK(axis.front() == 0.0);
  CHECK(axis.back() == 1.0);
  CHECK(zf_surface_values(s, values.data(), 10) == ZF_ERR_ARGUMENT);

  double res = 1;
  CHECK(zf_surface_residual(s, 0, 1, &res) == ZF_OK);
  CHECK(res <= 1e-10);
  double disc = 1;
  CHECK(zf_surface_boundary_discrepancy(s, &disc) == ZF_OK);
  CHECK(disc <= 1e-10);

  double value = 0, bound = 0;
  const double q[] = {0.3};
  CHECK(zf_surface_query(s, q, 4, &value, &bound) == ZF_OK);
  CHECK(bound >= 0.0);

  fs::create_directories("capi_out");
  CHECK(zf_surface_write_csv(s, "capi_out/surface.csv") == ZF_OK);
  CHECK(slurp("capi_out/surface.csv").rfind("x1,value\n", 0) == 0);

  CHECK(zf_surface_corrupt(s, 3, 0.5) == ZF_OK);
  CHECK(zf_surface_residual(s, 0, 1, &res) == ZF_OK);
  CHECK(res > 1e-3);

  // budget violations surface as ZF_ERR_BUDGET
  zf_surface* deep = nullptr;
  CHECK(zf_surface_build(h.g, a, f, degrees, nullptr, 10, 100, &deep) ==
        ZF_ERR_BUDGET);

  zf_surface_free(s);
  zf_scaling_free(a);
  zf_germ_free(f);
}

TEST_CASE("shape workflow via the C surface") {
  GridHandle h{make_half_grid()};
  const double lo[] = {0.0}, hi[] = {1.0};
  zf_germ* f = nullptr;
  REQUIRE(zf_germ_builtin("oneplussq", 1, lo, hi, nullptr, 0, &f) == ZF_OK);
  const int degrees[] = {2};
  zf_bernstein* bn = nullptr;
  REQUIRE(zf_bernstein_create(f, degrees, &bn) == ZF_OK);

  double ilo[2], ihi[2];
  REQUIRE(zf_shape_positivity(h.g, f, bn, 2.5, 129, ilo, ihi) == ZF_OK);
  CHECK(ilo[0] == doctest::Approx(-0.625).epsilon(1e-9));
  CHECK(ihi[0] == doctest::Approx(0.5).epsilon(1e-9));

  double pick = 0;
  REQUIRE(zf_shape_pick_constant(h.g, ilo, ihi, &pick) == ZF_OK);
  CHECK(pick == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  zf_scaling* a = nullptr;
  REQUIRE(zf_scaling_constant(pick, &a) == ZF_OK);
  zf_surface* s = nullptr;
  REQUIRE(zf_surface_build(h.g, a, f, degrees, nullptr, 8, 0, &s) == ZF_OK);
  double worst = 0;
  int pass = 0;
  CHECK(zf_shape_verify(s, 0, nullptr, 0, 1e-10, &worst, &pass) == ZF_OK);
  CHECK(pass == 1);

  // empty intersections are reported as such
  const double dlo[] = {0.2, -0.3};
  const double dhi[] = {0.3, -0.2};
  CHECK(zf_shape_pick_constant(h.g, dlo, dhi, &pick) ==
        ZF_ERR_EMPTY_INTERSECTION);

  zf_surface_free(s);
  zf_scaling_free(a);
  zf_bernstein_free(bn);
  zf_germ_free(f);
}

TEST_CASE("dimension workflow via the C surface") {
  GridHandle h{make_half_grid()};
  const double values[] = {0.0, 0.8, 0.2};
  zf_germ* f = nullptr;
  REQUIRE(zf_germ_tabulated(h.g, values, 3, &f) == ZF_OK);
  zf_scaling* a = nullptr;
  const double cells[] = {0.6, -0.6};
  REQUIRE(zf_scaling_cellblend(h.g, cells, 0.8, &a) == ZF_OK);

  double gamma = 0;
  int extended = 0;
  CHECK(zf_dim_gamma(a, h.g, 65, &gamma, &extended) == ZF_OK);
  CHECK(gamma == doctest::Approx(1.2).epsilon(1e-9));
  CHECK(extended == 1);

  int which = 0;
  double lower = 0, upper = 0;
  const int ncells[] = {2};
  CHECK(zf_dim_theory(gamma, 1.0, 1, ncells, &which, &lower, &upper) == ZF_OK);
  CHECK(which == 3);
  CHECK(lower == 1.0);
  CHECK(upper == doctest::Approx(1.263).epsilon(1e-3));

  const int degrees[] = {2};
  zf_surface* s = nullptr;
  REQUIRE(zf_surface_build(h.g, a, f, degrees, nullptr, 11, 0, &s) == ZF_OK);
  int64_t count = 0;
  CHECK(zf_dim_box_count(s, 4, &count) == ZF_OK);
  CHECK(count > 16);

  char* json = nullptr;
  CHECK(zf_dim_report(s, 1.0, 1.0, 4, 9, &json) == ZF_OK);
  REQUIRE(json != nullptr);
  CHECK(std::string(json).find("\"case\": \"iii\"") != std::string::npos);
  zf_string_free(json);

  zf_surface_free(s);
  zf_scaling_free(a);
  zf_germ_free(f);
}

TEST_CASE("config runner through the C surface") {
  const char* config = R"({
    "domain": {"axes": [{"nodes": [0.0, 0.5, 1.0]}]},
    "signature": [0],
    "scaling": {"constant": 0.5},
    "germ": {"builtin": "sqsum"},
    "base": {"bernstein": 2},
    "level": 3,
    "seed": 5
  })";
  fs::remove_all("capi_run1");
  fs::remove_all("capi_run2");
  char* summary = nullptr;
  CHECK(zf_run("build", config, "capi_run1", &summary) == 0);
  REQUIRE(summary != nullptr);
  CHECK(std::string(summary).find("\"bound_ok\": true") != std::string::npos);
  zf_string_free(summary);
  CHECK(zf_run("build", config, "capi_run2", nullptr) == 0);
  CHECK(slurp("capi_run1/run_surface.csv") ==
        slurp("capi_run2/run_surface.csv"));

  CHECK(zf_run("build", "{}", "capi_run1", nullptr) == 2);
  CHECK(zf_run(nullptr, config, "x", nullptr) == 2);
}
