#pragma once

#include <string>
#include <vector>

#include "germ.hpp"
#include "types.hpp"

namespace zipfrac {

// Formats with 17 significant digits, enough to round-trip a double.
std::string format_double(double v);

// Writes via a temp file in the same directory, then renames into place.
void write_file_atomic(const std::string& path, const std::string& content);

// CSV with header x1,...,xm,value; one row per grid point, lexicographic by
// index with the last axis fastest.
std::string csv_from_grid(const std::vector<std::vector<double>>& axes,
                          const std::vector<double>& values);

// Reads a x1..xm,value CSV back into a tabulated grid. When `expected_nodes`
// is non-empty the coordinates must match it row by row; otherwise the
// per-axis node vectors are inferred from the rows.
TabulatedGrid read_grid_csv(const std::string& path,
                            const std::vector<std::vector<double>>&
                                expected_nodes = {});

}  // namespace zipfrac
