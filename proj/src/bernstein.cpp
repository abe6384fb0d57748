#include "bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace zipfrac {

BernsteinSpec::BernsteinSpec(std::shared_ptr<const GermFunction> germ,
                             std::vector<int> degrees)
    : germ_(std::move(germ)), degrees_(std::move(degrees)) {
  if (!germ_) fail(ErrorCode::Argument, "null germ");
  domain_ = germ_->domain;
  if (static_cast<int>(degrees_.size()) != domain_.dims())
    fail(ErrorCode::Argument, "degree vector length != dims");
  for (int n : degrees_) {
    if (n < 1) fail(ErrorCode::Argument, "Bernstein degrees must be >= 1");
    if (n > kMaxDegree)
      fail(ErrorCode::Argument,
           "Bernstein degree beyond cap " + std::to_string(kMaxDegree));
  }

  const int m = domain_.dims();
  coeff_shape_.resize(m);
  for (int k = 0; k < m; ++k) coeff_shape_[k] = degrees_[k] + 1;
  coeffs_.resize(element_count(coeff_shape_));

  std::vector<int> idx(m, 0);
  std::int64_t flat = 0;
  do {
    Point x(m);
    for (int k = 0; k < m; ++k)
      x[k] = domain_.lo[k] +
             domain_.length(k) * static_cast<double>(idx[k]) / degrees_[k];
    coeffs_[flat++] = germ_->eval(x);
  } while (next_index(idx, coeff_shape_));
}

std::vector<double> BernsteinSpec::basis(int n, double x, double lo,
                                         double hi) {
  const double t = (x - lo) / (hi - lo);
  std::vector<double> b(n + 1, 0.0);
  if (t <= 0.0) {
    b[0] = 1.0;
    return b;
  }
  if (t >= 1.0) {
    b[n] = 1.0;
    return b;
  }
  // Start at the largest term and walk outward by the neighbour ratio; all
  // products decay, so nothing overflows and underflow only drops terms that
  // are negligible anyway. Normalising by the running sum restores the
  // partition of unity exactly.
  const int peak = std::clamp(static_cast<int>(t * (n + 1)), 0, n);
  const double up = t / (1.0 - t);
  const double down = (1.0 - t) / t;
  b[peak] = 1.0;
  for (int i = peak; i > 0; --i)
    b[i - 1] = b[i] * (static_cast<double>(i) / (n - i + 1)) * down;
  for (int i = peak; i < n; ++i)
    b[i + 1] = b[i] * (static_cast<double>(n - i) / (i + 1)) * up;
  double sum = 0.0;
  for (double v : b) sum += v;
  for (double& v : b) v /= sum;
  return b;
}

double BernsteinSpec::eval(const Point& x) const {
  if (!domain_.contains(x, 1e-12))
    fail(ErrorCode::Domain, "Bernstein evaluated outside the domain");
  const int m = domain_.dims();
  std::vector<std::vector<double>> w(m);
  for (int k = 0; k < m; ++k)
    w[k] = basis(degrees_[k], x[k], domain_.lo[k], domain_.hi[k]);

  double sum = 0.0;
  std::vector<int> idx(m, 0);
  std::int64_t flat = 0;
  do {
    double prod = coeffs_[flat++];
    for (int k = 0; k < m; ++k) prod *= w[k][idx[k]];
    sum += prod;
  } while (next_index(idx, coeff_shape_));
  return sum;
}

double BernsteinSpec::partial(const Point& x, int axis) const {
  if (!domain_.contains(x, 1e-12))
    fail(ErrorCode::Domain, "Bernstein evaluated outside the domain");
  if (axis < 0 || axis >= domain_.dims())
    fail(ErrorCode::Argument, "axis out of range");
  const int m = domain_.dims();
  const int n_l = degrees_[axis];

  // d/dx B_n f = (n/len) * sum over the degree-(n-1) basis of the forward
  // differences of the coefficients along `axis`.
  std::vector<std::vector<double>> w(m);
  for (int k = 0; k < m; ++k)
    w[k] = (k == axis) ? basis(n_l - 1, x[k], domain_.lo[k], domain_.hi[k])
                       : basis(degrees_[k], x[k], domain_.lo[k], domain_.hi[k]);

  std::vector<int> shape = coeff_shape_;
  shape[axis] = n_l;  // one fewer along the differenced axis

  std::int64_t stride = 1;
  for (int k = axis + 1; k < m; ++k) stride *= coeff_shape_[k];

  double sum = 0.0;
  std::vector<int> idx(m, 0);
  do {
    const std::int64_t flat = flat_index(idx, coeff_shape_);
    double prod = coeffs_[flat + stride] - coeffs_[flat];
    for (int k = 0; k < m; ++k) prod *= w[k][idx[k]];
    sum += prod;
  } while (next_index(idx, shape));
  return sum * n_l / domain_.length(axis);
}

namespace {

// Uniform closed sampling grid on a box, visiting callback per point.
template <typename F>
void for_grid(const Box& box, int per_axis, F&& visit) {
  const int m = box.dims();
  std::vector<int> shape(m, per_axis);
  std::vector<int> idx(m, 0);
  Point x(m);
  do {
    for (int k = 0; k < m; ++k)
      x[k] = box.lo[k] +
             box.length(k) * static_cast<double>(idx[k]) / (per_axis - 1);
    visit(x);
  } while (next_index(idx, shape));
}

}  // namespace

std::pair<double, double> BernsteinSpec::extrema(int grid_per_axis) const {
  if (grid_per_axis < 33)
    fail(ErrorCode::Argument, "extrema sampling needs >= 33 points per axis");
  double mn = std::numeric_limits<double>::infinity();
  double mx = -mn;
  for_grid(domain_, grid_per_axis, [&](const Point& x) {
    const double v = eval(x);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  });
  return {mn, mx};
}

double BernsteinSpec::sup_error(int grid_per_axis) const {
  if (grid_per_axis < 33)
    fail(ErrorCode::Argument, "sup-error sampling needs >= 33 points per axis");
  double sup = 0.0;
  for_grid(domain_, grid_per_axis, [&](const Point& x) {
    sup = std::max(sup, std::abs(germ_->eval(x) - eval(x)));
  });
  return sup;
}

LipschitzReport BernsteinSpec::verify_lipschitz(double A, double beta,
                                                int trials,
                                                unsigned seed) const {
  if (A < 0.0 || beta <= 0.0 || beta > 1.0)
    fail(ErrorCode::Argument, "need A >= 0 and beta in (0,1]");
  LipschitzReport report;
  report.trials = trials;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int m = domain_.dims();
  for (int t = 0; t < trials; ++t) {
    Point x(m), y(m);
    for (int k = 0; k < m; ++k) {
      x[k] = domain_.lo[k] + unit(rng) * domain_.length(k);
      y[k] = domain_.lo[k] + unit(rng) * domain_.length(k);
    }
    double d2 = 0.0;
    for (int k = 0; k < m; ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
    const double dist = std::sqrt(d2);
    if (dist == 0.0) continue;
    const double diff = std::abs(eval(x) - eval(y));
    const double budget = A * std::pow(dist, beta);
    if (budget > 0.0)
      report.max_ratio = std::max(report.max_ratio, diff / budget);
    const double excess = diff - (budget + 1e-9);
    if (excess > 0.0) {
      report.pass = false;
      report.worst_excess = std::max(report.worst_excess, excess);
    }
  }
  return report;
}

}  // namespace zipfrac
