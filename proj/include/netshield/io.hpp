#ifndef NETSHIELD_IO_HPP
#define NETSHIELD_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "netshield/centrality.hpp"
#include "netshield/model.hpp"
#include "netshield/waterfill.hpp"

namespace netshield {

/// An edge list with optional labels. Edges are stored as given; adjacency()
/// mirrors them when the graph is undirected.
struct GraphInput {
  struct Edge {
    int src = 0;
    int dst = 0;
    double weight = 1.0;
  };
  int n = 0;
  std::vector<Edge> edges;
  std::vector<std::string> labels;
  bool directed = true;

  Matrix adjacency() const {
    Matrix a = Matrix::Zero(n, n);
    for (const Edge& e : edges) {
      a(e.src, e.dst) = e.weight;
      if (!directed) a(e.dst, e.src) = e.weight;
    }
    return a;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double format_guard(double x) { return x == 0.0 ? 0.0 : x; }  // drop -0

/// 17 significant digits: enough for an exact binary round trip.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", format_guard(x));
  return buf;
}

}  // namespace detail

/// Parses a `src,dst[,weight]` CSV. Indices may be declared 1-based; missing
/// weights default to 1. Duplicate edges (including an undirected edge listed
/// in both orientations) and out-of-range indices are errors that carry the
/// offending line number.
inline GraphInput read_edge_list(std::istream& in, bool one_based = false,
                                 bool directed = true, int n_nodes = -1) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("edge list: empty input, expected header");
  auto header = detail::split_csv(line);
  if (header.size() < 2 || header[0] != "src" || header[1] != "dst" ||
      (header.size() == 3 && header[2] != "weight") || header.size() > 3)
    throw std::invalid_argument(
        "edge list: line 1: header must be 'src,dst[,weight]', got '" + line + "'");

  GraphInput g;
  g.directed = directed;
  std::set<std::pair<int, int>> seen;
  int max_index = -1;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv(line);
    if (fields.size() < 2 || fields.size() > 3)
      throw std::invalid_argument("edge list: line " + std::to_string(line_no) +
                                  ": expected 2 or 3 fields, got " +
                                  std::to_string(fields.size()));
    GraphInput::Edge e;
    try {
      e.src = std::stoi(fields[0]);
      e.dst = std::stoi(fields[1]);
      e.weight = fields.size() == 3 && !fields[2].empty() ? std::stod(fields[2]) : 1.0;
    } catch (const std::exception&) {
      throw std::invalid_argument("edge list: line " + std::to_string(line_no) +
                                  ": cannot parse '" + line + "'");
    }
    if (one_based) {
      --e.src;
      --e.dst;
    }
    if (e.src < 0 || e.dst < 0)
      throw std::invalid_argument("edge list: line " + std::to_string(line_no) +
                                  ": negative node index");
    if (e.weight < 0.0)
      throw std::invalid_argument("edge list: line " + std::to_string(line_no) +
                                  ": negative weight");
    if (!seen.insert({e.src, e.dst}).second ||
        (!directed && e.src != e.dst && seen.count({e.dst, e.src})))
      throw std::invalid_argument("edge list: line " + std::to_string(line_no) +
                                  ": duplicate edge " + std::to_string(e.src) +
                                  " -> " + std::to_string(e.dst));
    if (!directed && e.src != e.dst) seen.insert({e.dst, e.src});
    max_index = std::max({max_index, e.src, e.dst});
    g.edges.push_back(e);
  }
  g.n = n_nodes >= 0 ? n_nodes : max_index + 1;
  if (max_index >= g.n)
    throw std::invalid_argument("edge list: node index " +
                                std::to_string(max_index) +
                                " out of range for n = " + std::to_string(g.n));
  return g;
}

inline GraphInput read_edge_list_file(const std::string& path,
                                      bool one_based = false, bool directed = true,
                                      int n_nodes = -1) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return read_edge_list(in, one_based, directed, n_nodes);
}

/// Headerless square CSV of nonnegative reals (an input-output table).
inline Matrix read_io_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      double x;
      try {
        x = std::stod(f);
      } catch (const std::exception&) {
        throw std::invalid_argument("matrix: line " + std::to_string(line_no) +
                                    ": cannot parse '" + f + "'");
      }
      if (x < 0.0)
        throw std::invalid_argument("matrix: line " + std::to_string(line_no) +
                                    ": negative entry " + f);
      row.push_back(x);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("matrix: line " + std::to_string(line_no) +
                                  ": ragged row, expected " +
                                  std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("matrix: empty input");
  if (rows.size() != rows.front().size())
    throw std::invalid_argument("matrix: expected square input, got " +
                                std::to_string(rows.size()) + " x " +
                                std::to_string(rows.front().size()));
  const int n = static_cast<int>(rows.size());
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
  return m;
}

inline Matrix read_io_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return read_io_matrix(in);
}

/// Row-normalizes a nonnegative matrix into a stochastic one. A zero row has
/// no normalization and is rejected by name.
inline Matrix normalize_rows(const Matrix& a) {
  Matrix p = a;
  for (int i = 0; i < a.rows(); ++i) {
    double sum = a.row(i).sum();
    if (!(sum > 0.0))
      throw std::invalid_argument("normalize_rows: row " + std::to_string(i) +
                                  " sums to zero and cannot be normalized");
    p.row(i) /= sum;
  }
  return p;
}

/// Undirected star with `n_leaves` leaves; the center is node 0.
inline GraphInput make_star_graph(int n_leaves) {
  if (n_leaves < 1) throw std::invalid_argument("make_star_graph: need leaves");
  GraphInput g;
  g.n = n_leaves + 1;
  g.directed = false;
  for (int leaf = 1; leaf <= n_leaves; ++leaf)
    g.edges.push_back({0, leaf, 1.0});
  return g;
}

/// Nodes whose influence column is identically zero (their centrality would
/// vanish); use drop_nodes to pre-filter before computing centralities.
inline std::vector<int> zero_influence_nodes(const InfluenceOperator& op) {
  std::vector<int> out;
  for (int i = 0; i < op.n; ++i)
    if (op.l.col(i).cwiseAbs().maxCoeff() == 0.0) out.push_back(i);
  return out;
}

inline InfluenceOperator drop_nodes(const InfluenceOperator& op,
                                    const std::vector<int>& nodes) {
  std::vector<char> dead(op.n, 0);
  for (int i : nodes) dead.at(i) = 1;
  std::vector<int> keep;
  for (int i = 0; i < op.n; ++i)
    if (!dead[i]) keep.push_back(i);
  InfluenceOperator reduced;
  reduced.n = static_cast<int>(keep.size());
  reduced.l = Matrix(reduced.n, reduced.n);
  for (int r = 0; r < reduced.n; ++r)
    for (int c = 0; c < reduced.n; ++c) reduced.l(r, c) = op.l(keep[r], keep[c]);
  return reduced;
}

enum class SolutionFormat { json, csv };

/// Serializes a solution. JSON carries the scalar fields plus one per_node
/// entry per node; the CSV variant is one row per node with the scalar fields
/// repeated, 17 significant digits throughout.
inline void write_solution(std::ostream& out, const ProtectionSolution& sol,
                           const CentralityVector& y,
                           const std::vector<std::string>& labels,
                           SolutionFormat format) {
  if (!labels.empty() && static_cast<int>(labels.size()) != y.n)
    throw std::invalid_argument("write_solution: label count mismatch");
  Vector centrality = y.to_original();
  auto label_of = [&](int i) {
    return labels.empty() ? std::to_string(i) : labels[i];
  };
  if (format == SolutionFormat::json) {
    nlohmann::ordered_json doc;
    doc["budget"] = sol.budget;
    doc["lambda_star"] = sol.lambda_star;
    doc["k_active"] = sol.k_active;
    doc["regime"] = to_string(sol.regime);
    doc["thresholds"] = {{"c_low", sol.thresholds.c_low},
                         {"c_high", sol.thresholds.c_high}};
    auto per_node = nlohmann::ordered_json::array();
    for (int i = 0; i < y.n; ++i)
      per_node.push_back({{"index", i},
                          {"label", label_of(i)},
                          {"centrality", centrality(i)},
                          {"q", sol.q_star(i)}});
    doc["per_node"] = std::move(per_node);
    out << doc.dump(2) << '\n';
  } else {
    out << "index,label,centrality,q,lambda_star,budget,k_active,regime\n";
    for (int i = 0; i < y.n; ++i)
      out << i << ',' << label_of(i) << ',' << detail::format_double(centrality(i))
          << ',' << detail::format_double(sol.q_star(i)) << ','
          << detail::format_double(sol.lambda_star) << ','
          << detail::format_double(sol.budget) << ',' << sol.k_active << ','
          << to_string(sol.regime) << '\n';
  }
  if (!out) throw std::runtime_error("write_solution: sink not writable");
}

/// Sweep CSV with the fixed header C,lambda_opt,lambda_diff,ratio,k_active,regime.
inline void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("write_sweep: no rows");
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].budget > rows[i - 1].budget))
      throw std::invalid_argument("write_sweep: budgets must be strictly increasing");
  out << "C,lambda_opt,lambda_diff,ratio,k_active,regime\n";
  for (const SweepRow& r : rows)
    out << detail::format_double(r.budget) << ','
        << detail::format_double(r.lambda_opt) << ','
        << detail::format_double(r.lambda_diff) << ','
        << detail::format_double(r.ratio) << ',' << r.k_active << ','
        << to_string(r.regime) << '\n';
  if (!out) throw std::runtime_error("write_sweep: sink not writable");
}

/// Per-node protection trajectories over a budget grid, one column per node.
inline void write_q_trajectories(std::ostream& out, const std::vector<SweepRow>& rows,
                                 const Matrix& q_per_budget) {
  out << "C";
  for (int j = 0; j < q_per_budget.cols(); ++j) out << ",q" << j;
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << detail::format_double(rows[i].budget);
    for (int j = 0; j < q_per_budget.cols(); ++j)
      out << ',' << detail::format_double(q_per_budget(static_cast<int>(i), j));
    out << '\n';
  }
}

/// Writes through a temp file in the target directory and renames into place,
/// so readers never observe a half-written file.
inline void atomic_write_file(const std::string& path,
                              const std::function<void(std::ostream&)>& producer) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    producer(out);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target);
}

}  // namespace netshield

#endif  // NETSHIELD_IO_HPP
