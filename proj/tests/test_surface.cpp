#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "surface.hpp"

using namespace zipfrac;

namespace {

Box unit_box(int m) {
  Box b;
  b.lo.assign(m, 0.0);
  b.hi.assign(m, 1.0);
  return b;
}

std::shared_ptr<GermFunction> custom(std::function<double(const Point&)> f,
                                     const Box& box) {
  auto g = std::make_shared<GermFunction>();
  g->name = "custom";
  g->domain = box;
  g->eval_fn = std::move(f);
  return g;
}

// The worked m=1 fixture: f = x^2 on {0, 0.5, 1}, signature 0, alpha = 0.5,
// base = degree-2 Bernstein polynomial.
struct Fixture {
  std::shared_ptr<Grid> grid;
  std::shared_ptr<GermFunction> germ;
  BaseFunction base;
  ScalingField alpha = ScalingField::constant(0.5);

  Fixture() {
    grid = std::make_shared<Grid>(
        std::vector<std::vector<double>>{{0.0, 0.5, 1.0}},
        std::vector<int>{0});
    germ = custom([](const Point& x) { return x[0] * x[0]; }, unit_box(1));
    base = BaseFunction::bernstein(
        std::make_shared<BernsteinSpec>(germ, std::vector<int>{2}));
  }

  FractalSurface build(int level) const {
    return FractalSurface(grid, alpha, germ, base, level);
  }
};

int index_of(const std::vector<double>& xs, double x) {
  for (size_t i = 0; i < xs.size(); ++i)
    if (std::abs(xs[i] - x) <= 1e-14) return static_cast<int>(i);
  REQUIRE(false);
  return -1;
}

std::shared_ptr<Grid> random_grid(std::mt19937& rng, int m) {
  std::uniform_int_distribution<int> cells(2, 4), bit(0, 1);
  std::vector<std::vector<double>> nodes;
  std::vector<int> sig;
  for (int k = 0; k < m; ++k) {
    nodes.push_back(oracle::random_partition(0.0, 1.0, cells(rng), rng));
    sig.push_back(bit(rng));
  }
  return std::make_shared<Grid>(std::move(nodes), std::move(sig));
}

}  // namespace

TEST_CASE("zero scaling reproduces the germ exactly") {
  std::mt19937 rng(3);
  auto grid = random_grid(rng, 2);
  auto germ = std::make_shared<GermFunction>(
      make_builtin_germ("sinprod", grid->box()));
  auto base = BaseFunction::bernstein(
      std::make_shared<BernsteinSpec>(germ, std::vector<int>{3, 3}));
  const FractalSurface s(grid, ScalingField::constant(0.0), germ, base, 2);
  CHECK(s.sup_vs(*germ) <= 1e-12);
  CHECK(s.residual_check(0, 1) == 0.0);
}

TEST_CASE("hand-computed fixture values") {
  const Fixture fx;
  const FractalSurface s1 = fx.build(1);
  // level-1 axis: 0, 0.25, 0.5, 0.75, 1
  CHECK(s1.axis_nodes(0).size() == 5);
  CHECK(std::abs(s1.value_at({index_of(s1.axis_nodes(0), 0.25)}) - 0.0) <=
        1e-12);
  CHECK(std::abs(s1.value_at({index_of(s1.axis_nodes(0), 0.75)}) - 0.5) <=
        1e-12);

  // the same points keep their values on deeper refinements
  const FractalSurface s4 = fx.build(4);
  CHECK(std::abs(s4.value_at({index_of(s4.axis_nodes(0), 0.25)}) - 0.0) <=
        1e-12);
  CHECK(std::abs(s4.value_at({index_of(s4.axis_nodes(0), 0.75)}) - 0.5) <=
        1e-12);
}

TEST_CASE("interpolation at partition nodes") {
  std::mt19937 rng(7);
  for (int t = 0; t < 12; ++t) {
    const int m = std::uniform_int_distribution<int>(1, 3)(rng);
    auto grid = random_grid(rng, m);
    auto germ = std::make_shared<GermFunction>(make_builtin_germ(
        t % 2 ? "sinprod" : "oneplussq", grid->box()));
    auto base = BaseFunction::bernstein(std::make_shared<BernsteinSpec>(
        germ, std::vector<int>(m, 1 + t % 3)));
    const double c =
        std::uniform_real_distribution<double>(-0.8, 0.8)(rng);
    const FractalSurface s(grid, ScalingField::constant(c), germ, base,
                           m == 3 ? 1 : 2);

    std::vector<int> node_shape(m);
    for (int k = 0; k < m; ++k) node_shape[k] = grid->cells(k) + 1;
    std::vector<int> node(m, 0);
    do {
      Point x(m);
      for (int k = 0; k < m; ++k) x[k] = grid->nodes(k)[node[k]];
      CHECK(std::abs(s.node_value(node) - germ->eval(x)) <= 1e-12);
    } while (next_index(node, node_shape));
    CHECK(s.boundary_discrepancy() <= 1e-10);
    CHECK(s.residual_check(0, 1) <= 1e-10);
  }
}

TEST_CASE("residual check flags a corrupted value") {
  const Fixture fx;
  FractalSurface s = fx.build(5);
  CHECK(s.residual_check(0, 1) <= 1e-10);
  s.corrupt(17, 0.1);
  CHECK(s.residual_check(0, 1) >= 0.05 * 0.5);
}

TEST_CASE("perturbation bound") {
  const Fixture fx;
  // (0.5 / (1 - 0.5)) * sup |f - B_2 f| = 1.0 * 0.125
  CHECK(perturbation_bound(*fx.grid, fx.alpha, *fx.germ, fx.base, 129) ==
        doctest::Approx(0.125).epsilon(1e-12));

  // base == germ: nothing to perturb
  const BaseFunction self = BaseFunction::user(fx.germ);
  CHECK(perturbation_bound(*fx.grid, fx.alpha, *fx.germ, self, 65) == 0.0);

  CHECK(perturbation_bound(*fx.grid, ScalingField::constant(0.0), *fx.germ,
                           fx.base, 65) == 0.0);

  const FractalSurface s = fx.build(6);
  CHECK(s.sup_vs(*fx.germ) <= 0.125 + 1e-9);
}

TEST_CASE("point queries by descent") {
  const Fixture fx;
  const Point x{0.3};
  const QueryResult q0 = eval_point(*fx.grid, fx.alpha, *fx.germ, fx.base, x, 0);
  CHECK(q0.value == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(q0.error_bound == doctest::Approx(0.125).epsilon(1e-9));

  const QueryResult q1 =
      eval_point(*fx.grid, fx.alpha, *fx.germ, fx.base, {0.25}, 1);
  CHECK(std::abs(q1.value - 0.0) <= 1e-12);
  CHECK(q1.error_bound == doctest::Approx(0.5 * 0.125).epsilon(1e-9));

  // zero scaling: exact at any depth with a zero bound
  const ScalingField zero = ScalingField::constant(0.0);
  for (int d : {0, 1, 3}) {
    const QueryResult q = eval_point(*fx.grid, zero, *fx.germ, fx.base, x, d);
    CHECK(q.value == doctest::Approx(0.09).epsilon(1e-13));
    CHECK(q.error_bound == 0.0);
  }

  // deep descent converges to the stored grid values within the bound
  const FractalSurface s = fx.build(6);
  const auto& xs = s.axis_nodes(0);
  std::mt19937 rng(19);
  for (int t = 0; t < 40; ++t) {
    const int i =
        std::uniform_int_distribution<int>(0, (int)xs.size() - 1)(rng);
    const QueryResult q = s.query({xs[i]}, 8);
    CHECK(std::abs(q.value - s.value_at({i})) <= q.error_bound + 1e-12);
  }
}

TEST_CASE("zipper flip symmetry for a symmetric germ") {
  auto nodes = std::vector<std::vector<double>>{{0.0, 0.5, 1.0}};
  auto grid0 = std::make_shared<Grid>(nodes, std::vector<int>{0});
  auto grid1 = std::make_shared<Grid>(nodes, std::vector<int>{1});
  auto germ = custom([](const Point& x) { return x[0] * (1.0 - x[0]); },
                     unit_box(1));
  auto base0 = BaseFunction::bernstein(
      std::make_shared<BernsteinSpec>(germ, std::vector<int>{2}));
  const ScalingField a = ScalingField::constant(0.5);
  const FractalSurface s0(grid0, a, germ, base0, 6);
  const FractalSurface s1(grid1, a, germ, base0, 6);
  const int n = static_cast<int>(s0.axis_nodes(0).size());
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(s1.value_at({i}) - s0.value_at({n - 1 - i})) <= 1e-10);
}

TEST_CASE("function-space iteration contracts and matches the surface") {
  const Fixture fx;
  std::vector<double> final_values;
  const std::vector<double> diffs = rb_iteration_sup_diffs(
      *fx.grid, fx.alpha, *fx.germ, fx.base, 6, 10, &final_values);
  // contraction factor <= sup|alpha| while the iteration still moves; on the
  // self-similar grid it lands on the fixed point exactly after `level`
  // sweeps (every ancestor chain bottoms out at a partition node)
  int checked = 0;
  for (size_t t = 1; t < diffs.size() && diffs[t - 1] > 1e-12; ++t) {
    CHECK(diffs[t] <= (0.5 + 1e-6) * diffs[t - 1]);
    ++checked;
  }
  CHECK(checked >= 4);
  CHECK(diffs.back() <= 1e-12);
  // the iterate and the forward-refined surface are independent routes to
  // the same values
  const FractalSurface s = fx.build(6);
  REQUIRE(final_values.size() == s.values().size());
  double worst = 0.0;
  for (size_t i = 0; i < final_values.size(); ++i)
    worst = std::max(worst, std::abs(final_values[i] - s.values()[i]));
  CHECK(worst <= 1e-10);
}

TEST_CASE("data interpolation mode") {
  TabulatedGrid data;
  data.nodes = {{0.0, 0.5, 1.0}};
  data.values = {0.0, 0.8, 0.2};
  const ScalingField a = ScalingField::constant(0.4);
  const FractalSurface s =
      build_interpolant(data, {0}, a, {2}, nullptr, 3);
  CHECK(std::abs(s.node_value({0}) - 0.0) <= 1e-12);
  CHECK(std::abs(s.node_value({1}) - 0.8) <= 1e-12);
  CHECK(std::abs(s.node_value({2}) - 0.2) <= 1e-12);

  // constant data with a Bernstein base stays constant
  TabulatedGrid flat;
  flat.nodes = {{0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}};
  flat.values.assign(9, 2.5);
  const FractalSurface sf =
      build_interpolant(flat, {0, 1}, ScalingField::constant(0.6), {3, 3},
                        nullptr, 3);
  for (double v : sf.values()) CHECK(v == doctest::Approx(2.5).epsilon(1e-13));

  // zero scaling gives back the multilinear lift itself
  const FractalSurface sz =
      build_interpolant(data, {0}, ScalingField::constant(0.0), {2}, nullptr,
                        3);
  const GermFunction lift = lift_tabulated(data);
  CHECK(sz.sup_vs(lift) <= 1e-12);
}

TEST_CASE("budget and validation errors") {
  const Fixture fx;
  CHECK_THROWS_AS(
      FractalSurface(fx.grid, fx.alpha, fx.germ, fx.base, 8, 100), Error);
  try {
    FractalSurface(fx.grid, fx.alpha, fx.germ, fx.base, 8, 100);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Budget);
    CHECK(std::string(e.what()).find("513") != std::string::npos);
  }

  // user base that misses the germ at a corner
  auto bad = custom([](const Point&) { return 0.123; }, unit_box(1));
  CHECK_THROWS_AS(
      FractalSurface(fx.grid, fx.alpha, fx.germ, BaseFunction::user(bad), 2),
      Error);
}

TEST_CASE("pullback fields keep signed grids consistent") {
  // mixed signature in two dimensions with a node-blend field: the matching
  // conditions hold by construction, so shared boundaries must agree and the
  // self-referential identity must hold everywhere
  auto grid = std::make_shared<Grid>(
      std::vector<std::vector<double>>{{0.0, 0.3, 1.0}, {0.0, 0.6, 1.0}},
      std::vector<int>{1, 0});
  auto germ = std::make_shared<GermFunction>(
      make_builtin_germ("sinprod", grid->box()));
  auto base = BaseFunction::bernstein(
      std::make_shared<BernsteinSpec>(germ, std::vector<int>{4, 4}));
  const ScalingField alpha = ScalingField::node_blend(
      *grid, {0.3, 0.2, 0.1, 0.0, -0.1, -0.2, 0.2, 0.3, 0.1});
  const FractalSurface s(grid, alpha, germ, base, 4);
  CHECK(s.boundary_discrepancy() <= 1e-10);
  CHECK(s.residual_check(0, 5) <= 1e-10);
  CHECK(s.sup_vs(*germ) <= s.perturbation_bound(65) + 1e-9);

  // grid-point queries agree with the stored values within their bounds
  std::mt19937 rng(61);
  for (int t = 0; t < 25; ++t) {
    std::vector<int> idx(2);
    for (int k = 0; k < 2; ++k)
      idx[k] = std::uniform_int_distribution<int>(
          0, static_cast<int>(s.axis_nodes(k).size()) - 1)(rng);
    const QueryResult q = s.query(s.point_at(idx), 6);
    CHECK(std::abs(q.value - s.value_at(idx)) <= q.error_bound + 1e-10);
  }
}

TEST_CASE("level zero surface holds the germ node values") {
  const Fixture fx;
  const FractalSurface s = fx.build(0);
  CHECK(s.values().size() == 3);
  CHECK(s.value_at({1}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s.residual_check(0, 1) == 0.0);
}
