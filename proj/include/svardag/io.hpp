#ifndef SVARDAG_IO_HPP
#define SVARDAG_IO_HPP

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "svardag/partial_order.hpp"
#include "svardag/types.hpp"

namespace svardag {

// All CSV output is RFC-4180 with '.' decimals and no locale dependence.
// Raw matrix files carry no header; time-series data files carry a required
// header row naming the columns. Doubles are printed with %.17g, which
// round-trips every finite double bit-identically.

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || (end != nullptr && *end != '\0')) {
    throw io_error(context + ": cannot parse '" + s + "' as a number");
  }
  return v;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  return f;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for reading: " + path);
  return f;
}

}  // namespace detail

// --------------------------- raw matrix CSV --------------------------------

inline void write_matrix_csv(std::ostream& os, const Matrix& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) os << ',';
      os << detail::format_double(M(i, j));
    }
    os << '\n';
  }
}

inline void write_matrix_csv(const std::string& path, const Matrix& M) {
  auto f = detail::open_out(path);
  write_matrix_csv(f, M);
}

inline Matrix read_matrix_csv(std::istream& is, const std::string& context = "matrix csv") {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& fld : fields) row.push_back(detail::parse_double(fld, context));
    if (!rows.empty() && rows.front().size() != row.size()) {
      throw io_error(context + ": ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw io_error(context + ": no rows");
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return M;
}

inline Matrix read_matrix_csv(const std::string& path) {
  auto f = detail::open_in(path);
  return read_matrix_csv(f, path);
}

// --------------------------- time-series data CSV --------------------------

inline void write_data_csv(const std::string& path, const Matrix& data,
                           const std::vector<std::string>& colnames = {}) {
  auto f = detail::open_out(path);
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    if (j) f << ',';
    if (!colnames.empty()) {
      f << colnames[static_cast<std::size_t>(j)];
    } else {
      f << 'V' << (j + 1);
    }
  }
  f << '\n';
  write_matrix_csv(f, data);
}

struct NamedData {
  Matrix data;
  std::vector<std::string> colnames;
};

inline NamedData read_data_csv(const std::string& path) {
  auto f = detail::open_in(path);
  std::string header;
  if (!std::getline(f, header)) throw io_error(path + ": empty data file");
  NamedData out;
  out.colnames = detail::split_csv_line(header);
  out.data = read_matrix_csv(f, path);
  if (static_cast<std::size_t>(out.data.cols()) != out.colnames.size()) {
    throw io_error(path + ": header width disagrees with data width");
  }
  return out;
}

// --------------------------- model JSON ------------------------------------
// Schema: {"p": int, "d": int, "A": [[...]], "B": [[[...]], ...]} with B a
// list of d p x p matrices. Values round-trip bit-identically. An optional
// "meta" object (resolved run configuration, de-meaning/normalization state)
// may be attached; readers ignore keys they do not know.

inline nlohmann::json matrix_to_json(const Matrix& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& rows, const std::string& context) {
  if (!rows.is_array() || rows.empty()) throw io_error(context + ": expected a matrix");
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rows.front().size());
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != c) throw io_error(context + ": ragged matrix");
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return M;
}

inline nlohmann::json model_to_json(const StructuralMatrix& A, const LagStack& B,
                                    const nlohmann::json* meta = nullptr) {
  nlohmann::json j;
  j["p"] = static_cast<int>(A.dimension());
  j["d"] = static_cast<int>(B.lag_order());
  j["A"] = matrix_to_json(A.entries);
  nlohmann::json bs = nlohmann::json::array();
  for (const auto& blk : B.blocks) bs.push_back(matrix_to_json(blk));
  j["B"] = std::move(bs);
  if (meta != nullptr) j["meta"] = *meta;
  return j;
}

struct ModelFile {
  StructuralMatrix A;
  LagStack B;
  nlohmann::json meta;  // empty object when absent
};

inline ModelFile model_from_json(const nlohmann::json& j, const std::string& context) {
  if (!j.contains("p") || !j.contains("d") || !j.contains("A") || !j.contains("B")) {
    throw io_error(context + ": model JSON requires keys p, d, A, B");
  }
  const int p = j["p"].get<int>();
  const int d = j["d"].get<int>();
  ModelFile m;
  m.A.entries = matrix_from_json(j["A"], context + " (A)");
  if (m.A.entries.rows() != p || m.A.entries.cols() != p) {
    throw io_error(context + ": A dimensions disagree with p");
  }
  if (!j["B"].is_array() || static_cast<int>(j["B"].size()) != d) {
    throw io_error(context + ": B must hold d blocks");
  }
  for (const auto& blk : j["B"]) {
    m.B.blocks.push_back(matrix_from_json(blk, context + " (B block)"));
    if (m.B.blocks.back().rows() != p || m.B.blocks.back().cols() != p) {
      throw io_error(context + ": B block dimensions disagree with p");
    }
  }
  m.meta = j.value("meta", nlohmann::json::object());
  return m;
}

inline void write_model_json(const std::string& path, const StructuralMatrix& A,
                             const LagStack& B, const nlohmann::json* meta = nullptr) {
  auto f = detail::open_out(path);
  f << model_to_json(A, B, meta).dump(2) << '\n';
}

inline ModelFile read_model_json(const std::string& path) {
  auto f = detail::open_in(path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(path + ": " + e.what());
  }
  return model_from_json(j, path);
}

// --------------------------- prior files -----------------------------------
// Three on-disk encodings, selected by the CLI's --prior-format flag:
//   tiers: header "variable,tier", 1-based variable indices;
//   pairs: header "child,parent", 1-based forbidden coefficient cells;
//   gold:  head-less 0/1 adjacency matrix (gold(i,j)=1 means edge j -> i).

inline TierAssignment read_tier_csv(const std::string& path) {
  auto f = detail::open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw io_error(path + ": empty tier file");
  auto hdr = detail::split_csv_line(line);
  if (hdr.size() != 2 || hdr[0] != "variable" || hdr[1] != "tier") {
    throw io_error(path + ": expected header 'variable,tier'");
  }
  std::vector<std::pair<int, int>> entries;
  int max_var = 0;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != 2) throw io_error(path + ": expected two columns");
    const int var = static_cast<int>(detail::parse_double(fields[0], path));
    const int tier = static_cast<int>(detail::parse_double(fields[1], path));
    if (var < 1) throw io_error(path + ": variable indices are 1-based");
    entries.emplace_back(var, tier);
    max_var = std::max(max_var, var);
  }
  if (entries.empty()) throw io_error(path + ": no tier rows");
  TierAssignment t;
  t.tiers.assign(static_cast<std::size_t>(max_var), 0);
  for (auto [var, tier] : entries) t.tiers[static_cast<std::size_t>(var - 1)] = tier;
  for (int v : t.tiers) {
    if (v < 1) throw io_error(path + ": every variable 1..max needs exactly one tier");
  }
  return t;
}

inline void write_tier_csv(const std::string& path, const TierAssignment& t) {
  auto f = detail::open_out(path);
  f << "variable,tier\n";
  for (std::size_t v = 0; v < t.tiers.size(); ++v) {
    f << (v + 1) << ',' << t.tiers[v] << '\n';
  }
}

inline std::vector<std::pair<int, int>> read_pairs_csv(const std::string& path) {
  auto f = detail::open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw io_error(path + ": empty pair file");
  auto hdr = detail::split_csv_line(line);
  if (hdr.size() != 2 || hdr[0] != "child" || hdr[1] != "parent") {
    throw io_error(path + ": expected header 'child,parent'");
  }
  std::vector<std::pair<int, int>> pairs;  // returned 0-based
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != 2) throw io_error(path + ": expected two columns");
    const int child = static_cast<int>(detail::parse_double(fields[0], path));
    const int parent = static_cast<int>(detail::parse_double(fields[1], path));
    if (child < 1 || parent < 1) throw io_error(path + ": indices are 1-based");
    pairs.emplace_back(child - 1, parent - 1);
  }
  return pairs;
}

inline void write_pairs_csv(const std::string& path, const PartialOrdering& po) {
  auto f = detail::open_out(path);
  f << "child,parent\n";
  for (auto [child, parent] : po.forbidden_pairs()) {
    f << (child + 1) << ',' << (parent + 1) << '\n';
  }
}

// --------------------------- convergence trace -----------------------------

struct TraceRow {
  int outer_iter = 0;
  int inner_iter = 0;
  double lagrangian = 0.0;
  double primal_residual_A = 0.0;
  double primal_residual_B = 0.0;
  double constraint_residual = 0.0;
};

inline void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
  auto f = detail::open_out(path);
  f << "outer_iter,inner_iter,lagrangian,primal_residual_A,primal_residual_B,"
       "constraint_residual\n";
  for (const auto& r : rows) {
    f << r.outer_iter << ',' << r.inner_iter << ',' << detail::format_double(r.lagrangian)
      << ',' << detail::format_double(r.primal_residual_A) << ','
      << detail::format_double(r.primal_residual_B) << ','
      << detail::format_double(r.constraint_residual) << '\n';
  }
}

// --------------------------- long-format heatmap export --------------------
// One row per coefficient: child,parent,value (1-based indices), for
// external plotting of structure estimates.

inline void write_long_csv(const std::string& path, const Matrix& M) {
  auto f = detail::open_out(path);
  f << "child,parent,value\n";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      f << (i + 1) << ',' << (j + 1) << ',' << detail::format_double(M(i, j)) << '\n';
    }
  }
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  auto f = detail::open_out(path);
  f << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::string& path) {
  auto f = detail::open_in(path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(path + ": " + e.what());
  }
  return j;
}

}  // namespace svardag

#endif  // SVARDAG_IO_HPP
