#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailclust/clustering.hpp"
#include "tailclust/dataset.hpp"
#include "tailclust/models.hpp"
#include "tailclust/partition.hpp"
#include "tailclust/tail.hpp"
#include "tailclust/validation.hpp"

namespace tailclust::io {

// Content that opened fine but does not validate. Mapped to its own process
// exit status by the command line tool, distinct from unreadable files.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest representation that round-trips a double exactly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error("cannot read file: " + path);
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("cannot write file: " + path);
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(std::move(cur));
  }
  return lines;
}

inline std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

inline double parse_cell(const std::string& raw, const std::string& path,
                         std::size_t row, std::size_t col) {
  std::size_t lo = raw.find_first_not_of(" \t");
  if (lo == std::string::npos)
    throw ValidationError(path + ": empty cell at row " + std::to_string(row) +
                          ", column " + std::to_string(col));
  std::size_t hi = raw.find_last_not_of(" \t");
  const char* first = raw.data() + lo;
  const char* last = raw.data() + hi + 1;
  double value = 0.0;
  auto [end, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || end != last)
    throw ValidationError(path + ": non-numeric cell \"" + raw + "\" at row " +
                          std::to_string(row) + ", column " +
                          std::to_string(col));
  if (!std::isfinite(value))
    throw ValidationError(path + ": non-finite value at row " +
                          std::to_string(row) + ", column " +
                          std::to_string(col));
  return value;
}

inline nlohmann::json parse_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out += "\"";
  return out;
}

}  // namespace detail

// Numeric CSV. Rows are 1-based in messages, counted from the first data
// row when a header is present.
inline Matrix<double> load_matrix_csv(const std::string& path, bool header) {
  const auto lines = detail::split_lines(detail::read_file(path));
  std::size_t first = header ? 1 : 0;
  if (lines.size() <= first)
    throw ValidationError(path + ": no data rows");
  const std::size_t ncols = detail::split_cells(lines[first]).size();
  Matrix<double> m(lines.size() - first, ncols);
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto cells = detail::split_cells(lines[r]);
    if (cells.size() != ncols)
      throw ValidationError(path + ": row " + std::to_string(r - first + 1) +
                            " has " + std::to_string(cells.size()) +
                            " columns, expected " + std::to_string(ncols));
    for (std::size_t c = 0; c < ncols; ++c)
      m(r - first, c) = detail::parse_cell(cells[c], path, r - first + 1, c + 1);
  }
  return m;
}

inline GroupLayout load_layout(const std::string& path) {
  const nlohmann::json j = detail::parse_json(path);
  if (!j.is_array())
    throw ValidationError(path + ": layout must be an array of arrays");
  GroupLayout layout;
  for (const auto& g : j) {
    if (!g.is_array())
      throw ValidationError(path + ": layout must be an array of arrays");
    std::vector<int> cols;
    for (const auto& c : g) {
      if (!c.is_number_integer())
        throw ValidationError(path + ": column ids must be integers");
      cols.push_back(c.get<int>());
    }
    layout.groups.push_back(std::move(cols));
  }
  return layout;
}

inline void save_layout(const GroupLayout& layout, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& g : layout.groups) j.push_back(g);
  detail::write_file(path, j.dump() + "\n");
}

inline Dataset load_dataset(const std::string& data_path,
                            const std::string& layout_path) {
  Dataset ds;
  ds.values = load_matrix_csv(data_path, /*header=*/true);
  ds.layout = load_layout(layout_path);
  try {
    validate_dataset(ds);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(data_path + ": " + e.what());
  }
  return ds;
}

inline void save_dataset(const Dataset& ds, const std::string& data_path,
                         const std::string& layout_path) {
  std::string out;
  for (int g = 0; g < ds.d(); ++g)
    for (std::size_t l = 0; l < ds.layout.groups[static_cast<std::size_t>(g)].size(); ++l) {
      if (!out.empty()) out += ",";
      out += "g" + std::to_string(g + 1) + "c" + std::to_string(l + 1);
    }
  out += "\n";
  // Columns are written in layout order; the saved layout matches.
  std::vector<int> col_order;
  for (const auto& g : ds.layout.groups)
    col_order.insert(col_order.end(), g.begin(), g.end());
  for (int i = 0; i < ds.n(); ++i) {
    for (std::size_t c = 0; c < col_order.size(); ++c) {
      if (c) out += ",";
      out += format_double(ds.values(static_cast<std::size_t>(i),
                                     static_cast<std::size_t>(col_order[c])));
    }
    out += "\n";
  }
  detail::write_file(data_path, out);

  GroupLayout renumbered;
  int next = 0;
  for (const auto& g : ds.layout.groups) {
    std::vector<int> cols;
    for (std::size_t l = 0; l < g.size(); ++l) cols.push_back(next++);
    renumbered.groups.push_back(std::move(cols));
  }
  save_layout(renumbered, layout_path);
}

inline void save_seco(const SecoMatrix& m, const std::string& csv_path,
                      const std::string& sidecar_path) {
  std::string out;
  for (std::size_t i = 0; i < m.entries.rows(); ++i) {
    for (std::size_t j = 0; j < m.entries.cols(); ++j) {
      if (j) out += ",";
      out += format_double(m.entries(i, j));
    }
    out += "\n";
  }
  detail::write_file(csv_path, out);

  nlohmann::ordered_json j;
  j["d"] = m.dim;
  j["k"] = m.k;
  j["thetas"] = m.thetas;
  detail::write_file(sidecar_path, j.dump(2) + "\n");
}

inline Matrix<double> load_square_matrix(const std::string& path) {
  Matrix<double> m = load_matrix_csv(path, /*header=*/false);
  if (m.rows() != m.cols())
    throw ValidationError(path + ": matrix is " + std::to_string(m.rows()) +
                          " by " + std::to_string(m.cols()) +
                          ", expected square");
  return m;
}

inline SecoMatrix load_seco(const std::string& csv_path,
                            const std::string& sidecar_path = "") {
  SecoMatrix m;
  m.entries = load_square_matrix(csv_path);
  m.dim = static_cast<int>(m.entries.rows());
  if (!sidecar_path.empty()) {
    const nlohmann::json j = detail::parse_json(sidecar_path);
    if (j.contains("d") && j["d"].get<int>() != m.dim)
      throw ValidationError(sidecar_path + ": sidecar says d=" +
                            std::to_string(j["d"].get<int>()) +
                            " but matrix is " + std::to_string(m.dim) +
                            " by " + std::to_string(m.dim));
    if (j.contains("k")) m.k = j["k"].get<int>();
    if (j.contains("thetas"))
      m.thetas = j["thetas"].get<std::vector<double>>();
  }
  return m;
}

// Partitions are serialized with 1-based group ids.
inline Partition load_partition(const std::string& path) {
  const nlohmann::json j = detail::parse_json(path);
  if (!j.is_object() || !j.contains("clusters"))
    throw ValidationError(path + ": expected an object with a clusters field");
  Partition p;
  int count = 0;
  for (const auto& c : j["clusters"]) {
    if (!c.is_array())
      throw ValidationError(path + ": clusters must be arrays of group ids");
    std::vector<int> cluster;
    for (const auto& g : c) {
      if (!g.is_number_integer())
        throw ValidationError(path + ": group ids must be integers");
      cluster.push_back(g.get<int>() - 1);
      ++count;
    }
    p.clusters.push_back(std::move(cluster));
  }
  p.d = count;
  if (j.contains("algorithm")) p.algorithm = j["algorithm"].get<std::string>();
  if (j.contains("tau")) p.tau = j["tau"].get<double>();
  if (j.contains("K")) p.K = j["K"].get<int>();
  p.normalize();
  try {
    validate_partition(p);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return p;
}

inline void save_partition(const Partition& p, const std::string& path) {
  nlohmann::ordered_json j;
  if (!p.algorithm.empty()) j["algorithm"] = p.algorithm;
  if (p.tau) j["tau"] = *p.tau;
  if (p.K) j["K"] = *p.K;
  nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
  for (const auto& c : p.clusters) {
    nlohmann::ordered_json ids = nlohmann::ordered_json::array();
    for (int g : c) ids.push_back(g + 1);
    clusters.push_back(ids);
  }
  j["clusters"] = clusters;
  detail::write_file(path, j.dump(2) + "\n");
}

inline void save_tau_curve(const TauCurve& curve, const std::string& path) {
  std::string out = "tau,seco,loss\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    out += format_double(curve.grid[i]) + "," + format_double(curve.seco[i]) +
           "," + format_double(curve.loss[i]) + "\n";
  detail::write_file(path, out);
}

namespace detail {

inline NestedModelSpec spec_from_json(const nlohmann::json& j,
                                      const std::string& path) {
  if (!j.is_object())
    throw ValidationError(path + ": model spec must be an object");
  for (const char* field : {"family", "mother", "children", "sizes"})
    if (!j.contains(field))
      throw ValidationError(path + ": model spec is missing \"" +
                            std::string(field) + "\"");
  NestedModelSpec spec;
  try {
    spec.family = parse_family(j["family"].get<std::string>());
    spec.mother = j["mother"].get<double>();
    spec.children = j["children"].get<std::vector<double>>();
    spec.sizes = j["sizes"].get<std::vector<int>>();
    validate_model_spec(spec);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(path + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return spec;
}

}  // namespace detail

// A model file holds either a single spec object or an array of them; an
// array means independent blocks sampled side by side.
inline std::vector<NestedModelSpec> load_model_specs(const std::string& path) {
  const nlohmann::json j = detail::parse_json(path);
  std::vector<NestedModelSpec> specs;
  if (j.is_array()) {
    if (j.empty()) throw ValidationError(path + ": empty model spec array");
    for (const auto& item : j)
      specs.push_back(detail::spec_from_json(item, path));
  } else {
    specs.push_back(detail::spec_from_json(j, path));
  }
  return specs;
}

inline void save_bounds_csv(const std::vector<BoundsRow>& rows,
                            const std::string& path) {
  std::string out =
      "n,cols,k,m,blocks,theta_eks,eks_bound,nu,nu_bound,theta_mad,"
      "mad_bound,ok\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + std::to_string(r.cols) + "," +
           std::to_string(r.k) + "," + std::to_string(r.m) + "," +
           std::to_string(r.blocks) + "," + format_double(r.theta_eks) + "," +
           format_double(r.eks_bound) + "," + format_double(r.nu) + "," +
           format_double(r.nu_bound) + "," + format_double(r.theta_mad) + "," +
           format_double(r.mad_bound) + "," + (r.ok() ? "true" : "false") + "\n";
  }
  detail::write_file(path, out);
}

inline void save_report_csv(const Report& report, const std::string& path) {
  std::string out = "check,passed,detail\n";
  for (const auto& c : report.checks)
    out += detail::csv_escape(c.name) + "," + (c.passed ? "true" : "false") + "," +
           detail::csv_escape(c.detail) + "\n";
  detail::write_file(path, out);
}

inline void save_report_json(const Report& report, const std::string& path) {
  nlohmann::ordered_json j;
  j["passed"] = report.passed();
  j["failed"] = report.failed();
  nlohmann::ordered_json details = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    nlohmann::ordered_json item;
    item["check"] = c.name;
    item["passed"] = c.passed;
    if (!c.detail.empty()) item["detail"] = c.detail;
    details.push_back(item);
  }
  j["details"] = details;
  detail::write_file(path, j.dump(2) + "\n");
}

inline void save_silhouette_csv(const SilhouetteResult& result,
                                const Partition& p, const std::string& path) {
  const std::vector<int> labels = p.labels();
  std::string out = "group,cluster,silhouette\n";
  for (std::size_t g = 0; g < result.values.size(); ++g)
    out += std::to_string(g + 1) + "," + std::to_string(labels[g] + 1) + "," +
           format_double(result.values[g]) + "\n";
  detail::write_file(path, out);
}

inline void save_ksel_csv(const KSelection& sel, const std::string& path) {
  std::string out = "K,avg_silhouette\n";
  for (std::size_t i = 0; i < sel.candidates.size(); ++i)
    out += std::to_string(sel.candidates[i]) + "," +
           format_double(sel.averages[i]) + "\n";
  detail::write_file(path, out);
}

inline void save_json(const nlohmann::ordered_json& j,
                      const std::string& path) {
  detail::write_file(path, j.dump(2) + "\n");
}

// Grids are written start:step:end (inclusive); a bare number is a
// one-point grid.
inline std::vector<double> parse_grid(const std::string& text) {
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) {
    try {
      return {std::stod(text)};
    } catch (const std::exception&) {
      throw std::invalid_argument("bad grid \"" + text +
                                  "\", expected start:step:end");
    }
  }
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos)
    throw std::invalid_argument("bad grid \"" + text +
                                "\", expected start:step:end");
  double start = 0, step = 0, end = 0;
  try {
    start = std::stod(text.substr(0, c1));
    step = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    end = std::stod(text.substr(c2 + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("bad grid \"" + text +
                                "\", expected start:step:end");
  }
  if (!(step > 0.0))
    throw std::invalid_argument("grid step must be > 0 in \"" + text + "\"");
  if (end < start)
    throw std::invalid_argument("grid end is before start in \"" + text +
                                "\"");
  const int count = static_cast<int>(std::floor((end - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) grid.push_back(start + step * i);
  return grid;
}

inline std::vector<int> parse_int_grid(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_grid(text)) {
    const int i = static_cast<int>(std::llround(v));
    if (std::abs(v - i) > 1e-9)
      throw std::invalid_argument("grid \"" + text +
                                  "\" must contain integers");
    out.push_back(i);
  }
  return out;
}

}  // namespace tailclust::io
