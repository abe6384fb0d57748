#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace zipfrac {

// A point in R^m and a 1-based multi-index of a grid cell.
using Point = std::vector<double>;
using CellIndex = std::vector<int>;

enum class ErrorCode {
  Argument,           // bad parameter (range, shape, null)
  Domain,             // point outside the domain / cell
  Config,             // invalid run configuration
  Budget,             // memory budget exceeded
  EmptyIntersection,  // no admissible scaling constant
  Unsupported,        // operation not defined for this input
  Resolution,         // surface too coarse for the request
  Io,                 // file read/write failure
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

// Axis-aligned box, lo[k] <= hi[k].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dims() const { return static_cast<int>(lo.size()); }
  double length(int axis) const { return hi[axis] - lo[axis]; }

  bool contains(const Point& x, double tol = 0.0) const {
    if (static_cast<int>(x.size()) != dims()) return false;
    for (int k = 0; k < dims(); ++k) {
      const double slack = tol * length(k);
      if (x[k] < lo[k] - slack || x[k] > hi[k] + slack) return false;
    }
    return true;
  }
};

// Steps a multi-index through [0, shape) in lexicographic order with the
// last axis fastest. Returns false once the index wraps past the end.
inline bool next_index(std::vector<int>& idx, const std::vector<int>& shape) {
  for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k) {
    if (++idx[k] < shape[k]) return true;
    idx[k] = 0;
  }
  return false;
}

inline std::int64_t flat_index(const std::vector<int>& idx,
                               const std::vector<int>& shape) {
  std::int64_t flat = 0;
  for (size_t k = 0; k < idx.size(); ++k) flat = flat * shape[k] + idx[k];
  return flat;
}

inline std::int64_t element_count(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int s : shape) n *= s;
  return n;
}

// Visits the closed uniform per_axis^m grid on a box.
template <typename F>
void for_uniform_grid(const Box& box, int per_axis, F&& visit) {
  const int m = box.dims();
  std::vector<int> shape(m, per_axis);
  std::vector<int> idx(m, 0);
  Point x(m);
  do {
    for (int k = 0; k < m; ++k)
      x[k] = box.lo[k] + box.length(k) * idx[k] / (per_axis - 1.0);
    visit(static_cast<const Point&>(x));
  } while (next_index(idx, shape));
}

}  // namespace zipfrac
