#include "csvio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace zipfrac {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) fail(ErrorCode::Io, "write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorCode::Io, "cannot rename '" + tmp + "' to '" + path + "'");
}

std::string csv_from_grid(const std::vector<std::vector<double>>& axes,
                          const std::vector<double>& values) {
  const int m = static_cast<int>(axes.size());
  std::vector<int> shape(m);
  for (int k = 0; k < m; ++k) shape[k] = static_cast<int>(axes[k].size());
  if (element_count(shape) != static_cast<std::int64_t>(values.size()))
    fail(ErrorCode::Argument, "grid/value shape mismatch");

  std::ostringstream out;
  for (int k = 0; k < m; ++k) out << "x" << (k + 1) << ",";
  out << "value\n";
  std::vector<int> idx(m, 0);
  std::int64_t flat = 0;
  do {
    for (int k = 0; k < m; ++k) out << format_double(axes[k][idx[k]]) << ",";
    out << format_double(values[flat++]) << "\n";
  } while (next_index(idx, shape));
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

TabulatedGrid read_grid_csv(
    const std::string& path,
    const std::vector<std::vector<double>>& expected_nodes) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Io, "'" + path + "' is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "value")
    fail(ErrorCode::Io, "'" + path + "': header must be x1,...,xm,value");
  const int m = static_cast<int>(header.size()) - 1;

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != m + 1)
      fail(ErrorCode::Io, "'" + path + "' line " + std::to_string(lineno) +
                              ": expected " + std::to_string(m + 1) +
                              " fields");
    std::vector<double> row;
    for (const auto& f : fields) {
      try {
        row.push_back(std::stod(f));
      } catch (const std::exception&) {
        fail(ErrorCode::Io, "'" + path + "' line " + std::to_string(lineno) +
                                ": bad number '" + f + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::Io, "'" + path + "' has no data rows");

  TabulatedGrid tab;
  if (!expected_nodes.empty()) {
    if (static_cast<int>(expected_nodes.size()) != m)
      fail(ErrorCode::Config, "'" + path + "': axis count does not match the "
                              "configured domain");
    tab.nodes = expected_nodes;
  } else {
    // Infer the per-axis node vectors from the coordinates seen.
    tab.nodes.assign(m, {});
    for (const auto& row : rows)
      for (int k = 0; k < m; ++k) {
        auto& xs = tab.nodes[k];
        const double v = row[k];
        auto it = std::lower_bound(xs.begin(), xs.end(), v - 1e-12);
        if (it == xs.end() || std::abs(*it - v) > 1e-12) xs.insert(it, v);
      }
  }

  const auto shape = tab.shape();
  if (element_count(shape) != static_cast<std::int64_t>(rows.size()))
    fail(ErrorCode::Config,
         "'" + path + "': " + std::to_string(rows.size()) +
             " rows do not fill the node grid (" +
             std::to_string(element_count(shape)) + " expected)");

  // Rows must arrive lexicographic by node index, last axis fastest.
  tab.values.resize(rows.size());
  std::vector<int> idx(m, 0);
  std::int64_t flat = 0;
  do {
    const auto& row = rows[flat];
    for (int k = 0; k < m; ++k) {
      const double want = tab.nodes[k][idx[k]];
      const double scale =
          std::max(1.0, tab.nodes[k].back() - tab.nodes[k].front());
      if (std::abs(row[k] - want) > 1e-9 * scale)
        fail(ErrorCode::Config,
             "'" + path + "' row " + std::to_string(flat + 2) +
                 ": coordinate on axis " + std::to_string(k + 1) +
                 " is out of lexicographic node order");
    }
    tab.values[flat] = row[m];
    ++flat;
  } while (next_index(idx, shape));
  tab.validate();
  return tab;
}

}  // namespace zipfrac
