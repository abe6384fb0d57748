#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>

#include <json.hpp>

#include "bernstein.hpp"
#include "csvio.hpp"
#include "dimension.hpp"
#include "germ.hpp"
#include "grid.hpp"
#include "scaling.hpp"
#include "shape.hpp"
#include "surface.hpp"
#include "types.hpp"

namespace zipfrac {
namespace {

using nlohmann::json;

const json& need(const json& j, const std::string& key,
                 const std::string& path) {
  if (!j.is_object() || !j.contains(key))
    fail(ErrorCode::Config, "missing config key '" + path + "'");
  return j.at(key);
}

double num_at(const json& j, const std::string& path) {
  if (!j.is_number())
    fail(ErrorCode::Config, "config key '" + path + "' must be a number");
  return j.get<double>();
}

int int_at(const json& j, const std::string& path) {
  if (!j.is_number_integer())
    fail(ErrorCode::Config, "config key '" + path + "' must be an integer");
  return j.get<int>();
}

std::vector<double> num_list_at(const json& j, const std::string& path) {
  if (!j.is_array())
    fail(ErrorCode::Config, "config key '" + path + "' must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(num_at(v, path + "[]"));
  return out;
}

std::vector<int> int_list_at(const json& j, const std::string& path) {
  if (!j.is_array())
    fail(ErrorCode::Config, "config key '" + path + "' must be an array");
  std::vector<int> out;
  for (const auto& v : j) out.push_back(int_at(v, path + "[]"));
  return out;
}

struct Config {
  json raw;
  unsigned seed = 0;
  int level = -1;  // -1: command decides
  int grid_per_axis = 129;
  int r_min = 2, r_max = 6;
  std::int64_t budget = kDefaultValueBudget;
  std::string prefix = "run";

  double tol(const std::string& name, double dflt) const {
    if (raw.contains("tolerances") && raw.at("tolerances").contains(name))
      return num_at(raw.at("tolerances").at(name), "tolerances." + name);
    return dflt;
  }
};

Config parse_common(const std::string& config_json) {
  Config c;
  try {
    c.raw = json::parse(config_json);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("config is not valid JSON: ") +
                                e.what());
  }
  if (!c.raw.is_object())
    fail(ErrorCode::Config, "config must be a JSON object");
  if (c.raw.contains("seed"))
    c.seed = static_cast<unsigned>(int_at(c.raw.at("seed"), "seed"));
  if (c.raw.contains("level")) c.level = int_at(c.raw.at("level"), "level");
  if (c.raw.contains("grid_per_axis"))
    c.grid_per_axis = int_at(c.raw.at("grid_per_axis"), "grid_per_axis");
  if (c.grid_per_axis < 33)
    fail(ErrorCode::Config, "grid_per_axis must be >= 33");
  if (c.raw.contains("budget")) {
    if (!c.raw.at("budget").is_number_integer())
      fail(ErrorCode::Config, "config key 'budget' must be an integer");
    c.budget = c.raw.at("budget").get<std::int64_t>();
  }
  if (c.raw.contains("r_range")) {
    const auto rs = int_list_at(c.raw.at("r_range"), "r_range");
    if (rs.size() != 2)
      fail(ErrorCode::Config, "r_range must be [r_min, r_max]");
    c.r_min = rs[0];
    c.r_max = rs[1];
  }
  if (c.raw.contains("out_prefix")) {
    if (!c.raw.at("out_prefix").is_string())
      fail(ErrorCode::Config, "out_prefix must be a string");
    c.prefix = c.raw.at("out_prefix").get<std::string>();
  }
  return c;
}

std::vector<std::vector<double>> parse_domain_axes(const json& domain) {
  const json& axes = need(domain, "axes", "domain.axes");
  if (!axes.is_array() || axes.empty())
    fail(ErrorCode::Config, "domain.axes must be a non-empty array");
  std::vector<std::vector<double>> nodes;
  for (size_t k = 0; k < axes.size(); ++k) {
    const std::string path = "domain.axes[" + std::to_string(k) + "]";
    const json& ax = axes.at(k);
    if (ax.contains("nodes")) {
      nodes.push_back(num_list_at(ax.at("nodes"), path + ".nodes"));
    } else if (ax.contains("range") && ax.contains("cells")) {
      const auto range = num_list_at(ax.at("range"), path + ".range");
      if (range.size() != 2 || !(range[0] < range[1]))
        fail(ErrorCode::Config, path + ".range must be [lo, hi] with lo < hi");
      const int cells = int_at(ax.at("cells"), path + ".cells");
      if (cells < 2) fail(ErrorCode::Config, path + ".cells must be >= 2");
      std::vector<double> xs(cells + 1);
      for (int i = 0; i <= cells; ++i)
        xs[i] = range[0] + (range[1] - range[0]) * i / cells;
      xs.back() = range[1];
      nodes.push_back(std::move(xs));
    } else {
      fail(ErrorCode::Config,
           path + " needs either 'nodes' or 'range' + 'cells'");
    }
  }
  return nodes;
}

std::vector<int> parse_signature(const json& raw, int m) {
  const json& sig = need(raw, "signature", "signature");
  if (!sig.is_array())
    fail(ErrorCode::Config, "signature must be an array of bits");
  std::vector<int> bits;
  for (size_t k = 0; k < sig.size(); ++k) {
    const std::string path = "signature[" + std::to_string(k) + "]";
    if (sig.at(k).is_array())
      fail(ErrorCode::Config,
           path + ": per-subinterval signature bits are not supported; the "
                  "construction stays continuous only when consecutive bits "
                  "agree, which forces one bit per axis");
    bits.push_back(int_at(sig.at(k), path));
  }
  if (static_cast<int>(bits.size()) != m)
    fail(ErrorCode::Config, "signature needs exactly one bit per axis");
  return bits;
}

std::shared_ptr<Grid> parse_grid(const Config& c) {
  const json& domain = need(c.raw, "domain", "domain");
  auto nodes = parse_domain_axes(domain);
  auto sig = parse_signature(c.raw, static_cast<int>(nodes.size()));
  try {
    return std::make_shared<Grid>(std::move(nodes), std::move(sig));
  } catch (const Error& e) {
    fail(ErrorCode::Config, std::string("domain: ") + e.what());
  }
}

std::shared_ptr<GermFunction> parse_germ_spec(const json& spec,
                                              const std::string& path,
                                              const Box& box) {
  if (spec.contains("csv")) {
    if (!spec.at("csv").is_string())
      fail(ErrorCode::Config, path + ".csv must be a path string");
    const TabulatedGrid tab =
        read_grid_csv(spec.at("csv").get<std::string>(), {});
    auto g = std::make_shared<GermFunction>(lift_tabulated(tab));
    for (int k = 0; k < box.dims(); ++k)
      if (std::abs(g->domain.lo[k] - box.lo[k]) > 1e-9 ||
          std::abs(g->domain.hi[k] - box.hi[k]) > 1e-9)
        fail(ErrorCode::Config,
             path + ".csv: data does not span the configured domain");
    return g;
  }
  const json& name = need(spec, "builtin", path + ".builtin");
  if (!name.is_string())
    fail(ErrorCode::Config, path + ".builtin must be a string");
  AffineParams params;
  if (spec.contains("c0")) params.c0 = num_at(spec.at("c0"), path + ".c0");
  if (spec.contains("coeffs"))
    params.coeffs = num_list_at(spec.at("coeffs"), path + ".coeffs");
  try {
    return std::make_shared<GermFunction>(
        make_builtin_germ(name.get<std::string>(), box, params));
  } catch (const Error& e) {
    fail(ErrorCode::Config, path + ": " + e.what());
  }
}

ScalingField parse_scaling(const Config& c, const Grid& grid) {
  const json& spec = need(c.raw, "scaling", "scaling");
  if (spec.contains("constant")) {
    const json& v = spec.at("constant");
    if (v.is_array())
      fail(ErrorCode::Config,
           "scaling.constant: per-cell constants are not supported; the "
           "matching conditions force adjacent cells to share their constant, "
           "so use a single number or a pullback blend "
           "(scaling.pullback.name = nodeblend | cellblend)");
    const double val = num_at(v, "scaling.constant");
    try {
      return ScalingField::constant(val);
    } catch (const Error& e) {
      fail(ErrorCode::Config, std::string("scaling.constant: ") + e.what());
    }
  }
  const json& pb = need(spec, "pullback", "scaling.pullback");
  const json& name = need(pb, "name", "scaling.pullback.name");
  const auto values =
      num_list_at(need(pb, "values", "scaling.pullback.values"),
                  "scaling.pullback.values");
  try {
    if (name == "nodeblend") return ScalingField::node_blend(grid, values);
    if (name == "cellblend") {
      double plateau = 0.5;
      if (pb.contains("plateau"))
        plateau = num_at(pb.at("plateau"), "scaling.pullback.plateau");
      return ScalingField::cell_blend(grid, values, plateau);
    }
  } catch (const Error& e) {
    fail(ErrorCode::Config, std::string("scaling.pullback: ") + e.what());
  }
  fail(ErrorCode::Config,
       "scaling.pullback.name must be 'nodeblend' or 'cellblend'");
}

struct ParsedBase {
  BaseFunction base;
  std::vector<int> degrees;  // empty for user bases
};

ParsedBase parse_base(const Config& c, std::shared_ptr<const GermFunction> germ,
                      const Grid& grid) {
  json spec = json::object({{"bernstein", 3}});
  if (c.raw.contains("base")) spec = c.raw.at("base");
  ParsedBase out;
  if (spec.contains("bernstein")) {
    const json& deg = spec.at("bernstein");
    if (deg.is_number_integer())
      out.degrees.assign(grid.dims(), deg.get<int>());
    else
      out.degrees = int_list_at(deg, "base.bernstein");
    try {
      out.base = BaseFunction::bernstein(
          std::make_shared<BernsteinSpec>(std::move(germ), out.degrees));
    } catch (const Error& e) {
      fail(ErrorCode::Config, std::string("base.bernstein: ") + e.what());
    }
    return out;
  }
  if (spec.contains("builtin")) {
    out.base = BaseFunction::user(parse_germ_spec(spec, "base", grid.box()));
    return out;
  }
  fail(ErrorCode::Config, "base needs either 'bernstein' or 'builtin'");
}

std::string out_path(const std::string& out_dir, const Config& c,
                     const std::string& suffix) {
  std::filesystem::create_directories(out_dir);
  return (std::filesystem::path(out_dir) / (c.prefix + suffix)).string();
}

json location_json(const std::vector<int>& loc) {
  json arr = json::array();
  for (int v : loc) arr.push_back(v);
  return arr;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

json cmd_build(const Config& c, const std::string& out_dir, bool interp_mode) {
  auto grid = parse_grid(c);
  const ScalingField alpha = parse_scaling(c, *grid);
  const int level = c.level >= 0 ? c.level : 4;

  std::shared_ptr<GermFunction> germ;
  std::optional<TabulatedGrid> data;
  const json& germ_spec = need(c.raw, "germ", "germ");
  if (interp_mode) {
    // Data-interpolation mode: the germ is the multilinear lift of the node
    // samples, whether they come from a CSV or from sampling a builtin.
    TabulatedGrid tab;
    for (int k = 0; k < grid->dims(); ++k) tab.nodes.push_back(grid->nodes(k));
    if (germ_spec.contains("csv")) {
      tab = read_grid_csv(germ_spec.at("csv").get<std::string>(), tab.nodes);
    } else {
      auto analytic = parse_germ_spec(germ_spec, "germ", grid->box());
      std::vector<int> shape(grid->dims());
      for (int k = 0; k < grid->dims(); ++k) shape[k] = grid->cells(k) + 1;
      std::vector<int> idx(grid->dims(), 0);
      do {
        Point x(grid->dims());
        for (int k = 0; k < grid->dims(); ++k) x[k] = grid->nodes(k)[idx[k]];
        tab.values.push_back(analytic->eval(x));
      } while (next_index(idx, shape));
    }
    data = tab;
    germ = std::make_shared<GermFunction>(lift_tabulated(tab));
  } else {
    germ = parse_germ_spec(germ_spec, "germ", grid->box());
  }

  ParsedBase base = parse_base(c, germ, *grid);
  FractalSurface surface(grid, alpha, germ, base.base, level, c.budget);

  surface.write_csv(out_path(out_dir, c, "_surface.csv"));

  const double sup_err = surface.sup_vs(*germ);
  const double bound = surface.perturbation_bound(
      std::min(c.grid_per_axis, 65));
  const double residual = surface.residual_check(
      surface.values().size() > 100000 ? 50000 : 0, c.seed);

  json summary;
  summary["command"] = interp_mode ? "interp" : "build";
  summary["level"] = level;
  summary["points"] = surface.values().size();
  summary["sup_surface_vs_germ"] = sup_err;
  summary["perturbation_bound"] = bound;
  summary["bound_ok"] = sup_err <= bound + c.tol("bound_slack", 1e-9);
  summary["residual_max"] = residual;
  summary["residual_ok"] = residual <= c.tol("residual", 1e-10);
  summary["boundary_discrepancy"] = surface.boundary_discrepancy();
  summary["sup_alpha"] = surface.sup_alpha();
  if (data) {
    double worst = 0.0;
    std::vector<int> shape(grid->dims());
    for (int k = 0; k < grid->dims(); ++k) shape[k] = grid->cells(k) + 1;
    std::vector<int> idx(grid->dims(), 0);
    std::int64_t flat = 0;
    do {
      worst = std::max(worst, std::abs(surface.node_value(idx) -
                                       data->values[flat++]));
    } while (next_index(idx, shape));
    summary["interp_max_error"] = worst;
    summary["interp_ok"] = worst <= c.tol("interp", 1e-12);
  }
  write_file_atomic(out_path(out_dir, c, "_summary.json"),
                    summary.dump(2) + "\n");
  return summary;
}

json cmd_bernstein(const Config& c, const std::string& out_dir) {
  auto grid = parse_grid(c);
  auto germ = parse_germ_spec(need(c.raw, "germ", "germ"), "germ",
                              grid->box());
  ParsedBase base = parse_base(c, germ, *grid);
  if (base.base.kind != BaseFunction::Kind::Bernstein)
    fail(ErrorCode::Config, "the bernstein command needs base.bernstein");
  const BernsteinSpec& spec = *base.base.bernstein_spec;

  std::vector<std::vector<double>> axes(grid->dims());
  for (int k = 0; k < grid->dims(); ++k) {
    axes[k].resize(c.grid_per_axis);
    for (int i = 0; i < c.grid_per_axis; ++i)
      axes[k][i] =
          grid->lo(k) + grid->length(k) * i / (c.grid_per_axis - 1.0);
  }
  std::vector<int> shape(grid->dims(), c.grid_per_axis);
  std::vector<double> values(element_count(shape));
  std::vector<int> idx(grid->dims(), 0);
  std::int64_t flat = 0;
  do {
    Point x(grid->dims());
    for (int k = 0; k < grid->dims(); ++k) x[k] = axes[k][idx[k]];
    values[flat++] = spec.eval(x);
  } while (next_index(idx, shape));
  write_file_atomic(out_path(out_dir, c, "_bernstein.csv"),
                    csv_from_grid(axes, values));

  const auto [mn, mx] = spec.extrema(c.grid_per_axis);
  json summary;
  summary["command"] = "bernstein";
  summary["degrees"] = base.degrees;
  summary["min"] = mn;
  summary["max"] = mx;
  summary["sup_error_vs_germ"] = spec.sup_error(c.grid_per_axis);
  summary["grid_per_axis"] = c.grid_per_axis;
  write_file_atomic(out_path(out_dir, c, "_summary.json"),
                    summary.dump(2) + "\n");
  return summary;
}

json cmd_convergence(const Config& c, const std::string& out_dir) {
  auto grid = parse_grid(c);
  auto germ = parse_germ_spec(need(c.raw, "germ", "germ"), "germ",
                              grid->box());
  const ScalingField alpha = parse_scaling(c, *grid);
  const int level = c.level >= 0 ? c.level : 4;
  std::vector<int> n_list{3, 5, 10, 20};
  if (c.raw.contains("n_list"))
    n_list = int_list_at(c.raw.at("n_list"), "n_list");

  const double s = alpha.sup_abs(*grid);
  const double slack = c.tol("bound_slack", 1e-9);
  json rows = json::array();
  bool all_ok = true;
  for (int n : n_list) {
    std::vector<int> degrees(grid->dims(), n);
    auto spec = std::make_shared<BernsteinSpec>(germ, degrees);
    const double sup_f_b = spec->sup_error(c.grid_per_axis);
    FractalSurface surface(grid, alpha, germ, BaseFunction::bernstein(spec),
                           level, c.budget);
    const double sup_f_surface = surface.sup_vs(*germ);
    const double bound = s >= 1.0 ? 0.0 : s / (1.0 - s) * sup_f_b;
    const bool ok = sup_f_surface <= bound + slack;
    all_ok = all_ok && ok;
    json row;
    row["n"] = n;
    row["sup_f_minus_bernstein"] = sup_f_b;
    row["sup_f_minus_surface"] = sup_f_surface;
    row["bound"] = bound;
    row["ok"] = ok;
    rows.push_back(row);
  }
  json summary;
  summary["command"] = "convergence";
  summary["level"] = level;
  summary["rows"] = rows;
  summary["pass"] = all_ok;
  write_file_atomic(out_path(out_dir, c, "_convergence.json"),
                    summary.dump(2) + "\n");
  return summary;
}

int shape_default_level(const Grid& grid, const std::string& property,
                        std::int64_t budget) {
  int level = property == "positivity" ? 8 : 6;
  // Shrink until the refinement grid fits the budget, but never below the
  // level-4 verification floor.
  auto points = [&](int lv) {
    __int128 total = 1;
    for (int k = 0; k < grid.dims(); ++k) {
      __int128 pts = 1;
      for (int s = 0; s <= lv; ++s) pts *= grid.cells(k);
      total *= (pts + 1);
      if (total > (__int128(1) << 62)) return (__int128(1) << 62);
    }
    return total;
  };
  while (level > 4 && points(level) > budget) --level;
  return level;
}

json cmd_shape(const Config& c, const std::string& out_dir) {
  auto grid = parse_grid(c);
  auto germ = parse_germ_spec(need(c.raw, "germ", "germ"), "germ",
                              grid->box());
  ParsedBase base = parse_base(c, germ, *grid);
  if (base.base.kind != BaseFunction::Kind::Bernstein)
    fail(ErrorCode::Config, "shape commands need base.bernstein");
  const BernsteinSpec& spec = *base.base.bernstein_spec;

  std::string property = "positivity";
  if (c.raw.contains("property"))
    property = c.raw.at("property").get<std::string>();
  std::string strategy = "max-constant";
  if (c.raw.contains("strategy"))
    strategy = c.raw.at("strategy").get<std::string>();
  const int level = c.level >= 0
                        ? c.level
                        : shape_default_level(*grid, property, c.budget);
  if (level < 4)
    fail(ErrorCode::Config, "shape verification needs level >= 4");

  int axis = 0;
  std::shared_ptr<GermFunction> comparison;
  std::vector<Interval> intervals;
  if (property == "positivity") {
    double c_n = 0.0;
    if (c.raw.contains("c_n")) c_n = num_at(c.raw.at("c_n"), "c_n");
    intervals = positivity_intervals(*germ, *grid, spec, c_n, c.grid_per_axis);
  } else if (property == "dominance") {
    comparison = parse_germ_spec(need(c.raw, "comparison", "comparison"),
                                 "comparison", grid->box());
    DominanceMode mode = DominanceMode::Pairwise;
    if (c.raw.contains("dominance_mode")) {
      const std::string m = c.raw.at("dominance_mode").get<std::string>();
      if (m == "vs-function")
        mode = DominanceMode::VsFunction;
      else if (m != "pairwise")
        fail(ErrorCode::Config,
             "dominance_mode must be 'pairwise' or 'vs-function'");
    }
    intervals = dominance_intervals(*germ, *comparison, *grid, base.degrees,
                                    mode, c.grid_per_axis);
  } else if (property == "monotone") {
    if (c.raw.contains("axis")) axis = int_at(c.raw.at("axis"), "axis") - 1;
    if (axis < 0 || axis >= grid->dims())
      fail(ErrorCode::Config, "axis must name a domain axis (1-based)");
    intervals = monotone_intervals(*germ, *grid, spec, axis, c.grid_per_axis);
  } else {
    fail(ErrorCode::Config,
         "property must be positivity | dominance | monotone");
  }

  ScalingField chosen = ScalingField::constant(0.0);
  json chosen_json;
  if (strategy == "max-constant") {
    const double value = pick_constant(intervals, *grid);
    chosen = ScalingField::constant(value);
    chosen_json["mode"] = "constant";
    chosen_json["value"] = value;
  } else if (strategy == "node-blend") {
    chosen = pick_node_blend(intervals, *grid, std::min(c.grid_per_axis, 65));
    chosen_json["mode"] = "nodeblend";
  } else {
    fail(ErrorCode::Config, "strategy must be max-constant | node-blend");
  }

  FractalSurface surface(grid, chosen, germ, base.base, level, c.budget);
  const double tol = c.tol("shape", 1e-9);
  VerifyResult verdict;
  if (property == "positivity") {
    verdict = verify_nonnegative(surface, tol);
  } else if (property == "dominance") {
    auto g_spec = std::make_shared<BernsteinSpec>(comparison, base.degrees);
    FractalSurface g_surface(grid, chosen, comparison,
                             BaseFunction::bernstein(g_spec), level, c.budget);
    verdict = verify_dominates(surface, g_surface, tol);
  } else {
    verdict = verify_increasing(surface, axis, tol);
  }

  json summary;
  summary["command"] = "shape";
  summary["property"] = property;
  if (property == "monotone") summary["axis"] = axis + 1;
  json cells = json::array();
  for (const auto& iv : intervals) cells.push_back({iv.lo, iv.hi});
  summary["per_cell_intervals"] = cells;
  summary["chosen_alpha"] = chosen_json;
  summary["level"] = level;
  summary["worst_violation"] = verdict.worst;
  summary["location"] = location_json(verdict.location);
  summary["pass"] = verdict.pass;
  write_file_atomic(out_path(out_dir, c, "_shape.json"),
                    summary.dump(2) + "\n");
  return summary;
}

int dim_default_level(const Grid& grid, int r_max) {
  // Two levels past the finest counting scale, and on every axis enough
  // refinement that each column still sees >= (prod N)^2 subintervals.
  double log_pn = 0.0;
  for (int k = 0; k < grid.dims(); ++k)
    log_pn += std::log(static_cast<double>(grid.cells(k)));
  int level = r_max + 2;
  for (int k = 0; k < grid.dims(); ++k) {
    const double log_nk = std::log(static_cast<double>(grid.cells(k)));
    const int need =
        static_cast<int>(std::ceil((r_max + 2) * log_pn / log_nk)) - 1;
    level = std::max(level, need);
  }
  return level;
}

json cmd_dim(const Config& c, const std::string& out_dir) {
  auto grid = parse_grid(c);
  if (!grid->is_uniform())
    fail(ErrorCode::Unsupported,
         "dimension estimation needs uniform partitions");
  for (int k = 0; k < grid->dims(); ++k)
    if (std::abs(grid->lo(k)) > 1e-12 || std::abs(grid->hi(k) - 1.0) > 1e-12)
      fail(ErrorCode::Unsupported,
           "dimension estimation needs the domain [0,1]^m");

  const ScalingField alpha = parse_scaling(c, *grid);
  const int level =
      c.level >= 0 ? c.level : dim_default_level(*grid, c.r_max);

  std::shared_ptr<GermFunction> germ;
  const json& germ_spec = need(c.raw, "germ", "germ");
  bool data_mode = c.raw.contains("data_mode") &&
                   c.raw.at("data_mode").get<bool>();
  if (germ_spec.contains("data") || data_mode || germ_spec.contains("csv")) {
    TabulatedGrid tab;
    for (int k = 0; k < grid->dims(); ++k) tab.nodes.push_back(grid->nodes(k));
    if (germ_spec.contains("data")) {
      tab.values = num_list_at(germ_spec.at("data"), "germ.data");
    } else if (germ_spec.contains("csv")) {
      tab = read_grid_csv(germ_spec.at("csv").get<std::string>(), tab.nodes);
    } else {
      auto analytic = parse_germ_spec(germ_spec, "germ", grid->box());
      std::vector<int> shape(grid->dims());
      for (int k = 0; k < grid->dims(); ++k) shape[k] = grid->cells(k) + 1;
      std::vector<int> idx(grid->dims(), 0);
      do {
        Point x(grid->dims());
        for (int k = 0; k < grid->dims(); ++k) x[k] = grid->nodes(k)[idx[k]];
        tab.values.push_back(analytic->eval(x));
      } while (next_index(idx, shape));
    }
    germ = std::make_shared<GermFunction>(lift_tabulated(tab));
    germ->holder_exponent = 1.0;  // piecewise multilinear
  } else {
    germ = parse_germ_spec(germ_spec, "germ", grid->box());
  }

  ParsedBase base = parse_base(c, germ, *grid);
  FractalSurface surface(grid, alpha, germ, base.base, level, c.budget);

  double xi1 = 0.0, xi2 = 0.0;
  if (c.raw.contains("xi1")) xi1 = num_at(c.raw.at("xi1"), "xi1");
  if (c.raw.contains("xi2")) xi2 = num_at(c.raw.at("xi2"), "xi2");
  const DimensionReport report = dimension_report(
      surface, xi1, xi2, c.r_min, c.r_max, std::min(c.grid_per_axis, 65));

  const bool hypothesis_flag =
      std::find(report.flags.begin(), report.flags.end(),
                "hypothesis-violated") != report.flags.end();
  const bool slope_ok = report.fit.slope >= grid->dims() - 0.2 &&
                        report.fit.slope <= report.bounds.upper + 0.2;

  json summary;
  summary["command"] = "dim";
  summary["gamma"] = report.gamma;
  summary["xi"] = report.xi;
  summary["case"] = report.bounds.which == DimensionCase::I
                        ? "i"
                        : report.bounds.which == DimensionCase::II ? "ii"
                                                                   : "iii";
  summary["lower"] = report.bounds.lower;
  summary["upper"] = report.bounds.upper;
  json scales = json::array();
  for (const auto& row : report.scales) {
    json r;
    r["r"] = row.r;
    r["delta"] = row.delta;
    r["count"] = row.count;
    scales.push_back(r);
  }
  summary["scales"] = scales;
  summary["slope"] = report.fit.slope;
  summary["residual"] = report.fit.residual;
  summary["flags"] = report.flags;
  summary["level"] = level;
  summary["pass"] = hypothesis_flag || slope_ok;
  write_file_atomic(out_path(out_dir, c, "_dimension.json"),
                    summary.dump(2) + "\n");
  return summary;
}

json cmd_verify(const Config& c, const std::string& out_dir,
                const std::string& suite) {
  auto grid = parse_grid(c);
  auto germ = parse_germ_spec(need(c.raw, "germ", "germ"), "germ",
                              grid->box());
  const ScalingField alpha = parse_scaling(c, *grid);
  ParsedBase base = parse_base(c, germ, *grid);
  const int dims = grid->dims();
  const int level =
      c.level >= 0 ? c.level : (dims == 1 ? 4 : (dims == 2 ? 3 : 1));

  auto want = [&suite](const std::string& name) {
    return suite.empty() || suite == "all" || suite == name;
  };
  json suites = json::array();
  bool all_pass = true;
  auto record = [&](const std::string& name, bool pass, json detail) {
    detail["suite"] = name;
    detail["pass"] = pass;
    suites.push_back(detail);
    all_pass = all_pass && pass;
  };

  if (want("join")) {
    const JoinReport jr = grid->check_join();
    record("join", jr.ok, {{"max_residual", jr.max_residual}});
  }

  std::optional<FractalSurface> surface;
  if (want("interpolation") || want("residual") || want("boundary")) {
    surface.emplace(grid, alpha, germ, base.base, level, c.budget);
    if (c.raw.contains("debug_corrupt")) {
      const json& dc = c.raw.at("debug_corrupt");
      surface->corrupt(int_at(need(dc, "offset", "debug_corrupt.offset"),
                              "debug_corrupt.offset"),
                       num_at(need(dc, "delta", "debug_corrupt.delta"),
                              "debug_corrupt.delta"));
    }
  }
  if (want("interpolation")) {
    double worst = 0.0;
    std::vector<int> shape(grid->dims());
    for (int k = 0; k < grid->dims(); ++k) shape[k] = grid->cells(k) + 1;
    std::vector<int> idx(grid->dims(), 0);
    do {
      Point x(grid->dims());
      for (int k = 0; k < grid->dims(); ++k) x[k] = grid->nodes(k)[idx[k]];
      worst = std::max(worst,
                       std::abs(surface->node_value(idx) - germ->eval(x)));
    } while (next_index(idx, shape));
    record("interpolation", worst <= c.tol("interp", 1e-12),
           {{"max_node_error", worst}});
  }
  if (want("residual")) {
    const double r = surface->residual_check(
        surface->values().size() > 100000 ? 50000 : 0, c.seed);
    record("residual", r <= c.tol("residual", 1e-10), {{"max_residual", r}});
  }
  if (want("boundary")) {
    const double b = surface->boundary_discrepancy();
    record("boundary", b <= c.tol("boundary", 1e-10),
           {{"max_discrepancy", b}});
  }
  if (want("bernstein") &&
      base.base.kind == BaseFunction::Kind::Bernstein) {
    const BernsteinSpec& spec = *base.base.bernstein_spec;
    std::mt19937 rng(c.seed + 17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double pou_err = 0.0, corner_err = 0.0, partial_err = 0.0;
    for (int t = 0; t < 1000; ++t) {
      Point x(grid->dims());
      for (int k = 0; k < grid->dims(); ++k)
        x[k] = grid->lo(k) + unit(rng) * grid->length(k);
      for (int k = 0; k < grid->dims(); ++k) {
        double sum = -1.0;
        for (double b : BernsteinSpec::basis(base.degrees[k], x[k],
                                             grid->lo(k), grid->hi(k)))
          sum += b;
        pou_err = std::max(pou_err, std::abs(sum));
      }
    }
    for (int corner = 0; corner < (1 << grid->dims()); ++corner) {
      Point x(grid->dims());
      for (int k = 0; k < grid->dims(); ++k)
        x[k] = ((corner >> k) & 1) ? grid->hi(k) : grid->lo(k);
      corner_err = std::max(corner_err,
                            std::abs(spec.eval(x) - germ->eval(x)));
    }
    for (int t = 0; t < 100; ++t) {
      Point x(grid->dims());
      for (int k = 0; k < grid->dims(); ++k)
        x[k] = grid->lo(k) + (0.05 + 0.9 * unit(rng)) * grid->length(k);
      for (int l = 0; l < grid->dims(); ++l) {
        const double h = 1e-6 * grid->length(l);
        Point fwd = x, bwd = x;
        fwd[l] += h;
        bwd[l] -= h;
        const double fd = (spec.eval(fwd) - spec.eval(bwd)) / (2 * h);
        const double an = spec.partial(x, l);
        partial_err = std::max(
            partial_err,
            std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)}));
      }
    }
    const bool pass =
        pou_err <= 1e-12 && corner_err <= 1e-12 && partial_err <= 1e-6;
    record("bernstein", pass,
           {{"partition_of_unity_error", pou_err},
            {"corner_error", corner_err},
            {"partial_vs_fd_rel_error", partial_err}});
  }
  if (want("lipschitz") && base.base.kind == BaseFunction::Kind::Bernstein &&
      germ->holder_constant && germ->holder_exponent) {
    const LipschitzReport lr = base.base.bernstein_spec->verify_lipschitz(
        *germ->holder_constant, *germ->holder_exponent, 10000, c.seed + 23);
    record("lipschitz", lr.pass,
           {{"max_ratio", lr.max_ratio},
            {"A", *germ->holder_constant},
            {"beta", *germ->holder_exponent}});
  }

  json summary;
  summary["command"] = "verify";
  summary["level"] = level;
  summary["suites"] = suites;
  summary["pass"] = all_pass;
  write_file_atomic(out_path(out_dir, c, "_verify.json"),
                    summary.dump(2) + "\n");
  return summary;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::Argument:
    case ErrorCode::Io:
    case ErrorCode::Resolution:
      return 2;
    case ErrorCode::Budget:
      return 3;
    case ErrorCode::EmptyIntersection:
      return 4;
    case ErrorCode::Unsupported:
      return 5;
    default:
      return 1;
  }
}

const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Argument: return "argument";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Config: return "config";
    case ErrorCode::Budget: return "budget";
    case ErrorCode::EmptyIntersection: return "empty-intersection";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Resolution: return "resolution";
    case ErrorCode::Io: return "io";
    default: return "internal";
  }
}

}  // namespace

CommandResult run_command(const std::string& subcommand,
                          const std::string& config_json,
                          const std::string& out_dir) {
  CommandResult result;
  try {
    const Config c = parse_common(config_json);
    json summary;
    if (subcommand == "build") {
      summary = cmd_build(c, out_dir, false);
    } else if (subcommand == "interp") {
      summary = cmd_build(c, out_dir, true);
    } else if (subcommand == "bernstein") {
      summary = cmd_bernstein(c, out_dir);
    } else if (subcommand == "convergence") {
      summary = cmd_convergence(c, out_dir);
    } else if (subcommand == "shape") {
      summary = cmd_shape(c, out_dir);
    } else if (subcommand == "dim") {
      summary = cmd_dim(c, out_dir);
    } else if (subcommand == "verify") {
      std::string suite = "all";
      if (c.raw.contains("suite"))
        suite = c.raw.at("suite").get<std::string>();
      summary = cmd_verify(c, out_dir, suite);
    } else {
      fail(ErrorCode::Config, "unknown subcommand '" + subcommand + "'");
    }
    if (summary.contains("pass") && !summary.at("pass").get<bool>())
      result.exit_code = 1;
    if ((subcommand == "build" || subcommand == "interp")) {
      bool ok = summary.at("bound_ok").get<bool>() &&
                summary.at("residual_ok").get<bool>();
      if (summary.contains("interp_ok"))
        ok = ok && summary.at("interp_ok").get<bool>();
      if (!ok) result.exit_code = 1;
    }
    result.summary_json = summary.dump(2) + "\n";
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.code());
    json summary;
    summary["command"] = subcommand;
    summary["error"] = e.what();
    summary["error_code"] = code_name(e.code());
    result.summary_json = summary.dump(2) + "\n";
  } catch (const std::exception& e) {
    result.exit_code = 1;
    json summary;
    summary["command"] = subcommand;
    summary["error"] = e.what();
    summary["error_code"] = "internal";
    result.summary_json = summary.dump(2) + "\n";
  }
  return result;
}

}  // namespace zipfrac
