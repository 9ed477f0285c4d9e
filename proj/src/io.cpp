#include "gnp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gnp/error.hpp"

namespace gnp::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const fs::path& path) {
  const std::string t = trim(s);
  if (t == "inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw InvalidInput("cannot parse number '" + t + "' in " + path.string());
  return v;
}

int parse_int(const std::string& s, const fs::path& path) {
  const std::string t = trim(s);
  int v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw InvalidInput("cannot parse integer '" + t + "' in " + path.string());
  return v;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::validate(const std::vector<std::string>& numeric_columns) const {
  std::set<std::string> names;
  for (const auto& h : header) {
    if (h.empty()) throw InvalidInput("CSV header has an empty column name");
    if (!names.insert(h).second) throw InvalidInput("CSV header repeats column '" + h + "'");
  }
  std::vector<std::size_t> numeric;
  for (const auto& c : numeric_columns) {
    const auto it = std::find(header.begin(), header.end(), c);
    if (it == header.end()) throw InvalidInput("CSV schema names unknown column '" + c + "'");
    numeric.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw InvalidInput("CSV row width does not match its header");
    for (std::size_t c : numeric) parse_double(row[c], "<table>");
  }
}

void write_csv(const fs::path& path, const CsvTable& table, const std::vector<std::string>& numeric_columns) {
  table.validate(numeric_columns);
  auto out = open_out(path);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
}

CsvTable read_csv(const fs::path& path) {
  auto in = open_in(path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split(line, ',');
    for (auto& c : cells) c = trim(c);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != table.header.size())
        throw InvalidInput("row width does not match the header in " + path.string());
      table.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw InvalidInput("empty CSV file " + path.string());
  return table;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected, const fs::path& path) {
  if (table.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw InvalidInput(path.string() + " must have header " + want);
  }
}

void write_edge_list(const fs::path& path, const Graph& g) {
  auto out = open_out(path);
  out << "# nodes " << g.size() << '\n';
  for (int i = 0; i < g.size(); ++i)
    for (int j = i + 1; j < g.size(); ++j)
      if (g.weights()(i, j) > 0.0) out << i << ' ' << j << ' ' << format_double(g.weights()(i, j)) << '\n';
}

Graph read_edge_list(const fs::path& path, const fs::path& coords_path) {
  auto in = open_in(path);
  std::string line;
  int n = -1;
  std::map<std::pair<int, int>, double> directed;
  int max_index = -1;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hdr(line.substr(1));
      std::string key;
      if (hdr >> key && key == "nodes") hdr >> n;
      continue;
    }
    std::istringstream row(line);
    std::string si, sj, sw;
    if (!(row >> si >> sj >> sw)) throw InvalidInput("edge lines must read 'i j w' in " + path.string());
    const int i = parse_int(si, path), j = parse_int(sj, path);
    const double w = parse_double(sw, path);
    if (i < 0 || j < 0) throw InvalidInput("negative node index in " + path.string());
    if (i == j) throw InvalidInput("self loop in " + path.string());
    auto [it, inserted] = directed.emplace(std::make_pair(i, j), w);
    if (!inserted && it->second != w) throw InvalidInput("conflicting duplicate edge in " + path.string());
    max_index = std::max({max_index, i, j});
  }
  if (n < 0) n = max_index + 1;
  if (max_index >= n) throw InvalidInput("edge references a node beyond the declared count in " + path.string());
  MatrixXd w = MatrixXd::Zero(n, n);
  for (const auto& [key, value] : directed) {
    const auto [i, j] = key;
    const auto rev = directed.find({j, i});
    if (rev != directed.end() && std::abs(rev->second - value) > 1e-12)
      throw InvalidInput("asymmetric edge weights in " + path.string());
    w(i, j) = value;
    w(j, i) = value;
  }
  std::optional<Coords> coords;
  if (!coords_path.empty()) {
    coords = read_coords(coords_path);
    if (coords->rows() != n) throw InvalidInput("coordinate file does not match the graph size");
  }
  return Graph(std::move(w), std::move(coords));
}

void write_coords(const fs::path& path, const Coords& coords) {
  CsvTable t{{"node", "x", "y"}, {}};
  for (Eigen::Index i = 0; i < coords.rows(); ++i)
    t.rows.push_back({std::to_string(i), format_double(coords(i, 0)), format_double(coords(i, 1))});
  write_csv(path, t, {"node", "x", "y"});
}

Coords read_coords(const fs::path& path) {
  const auto t = read_csv(path);
  require_header(t, {"node", "x", "y"}, path);
  Coords c(static_cast<Eigen::Index>(t.rows.size()), 2);
  std::vector<bool> seen(t.rows.size(), false);
  for (const auto& r : t.rows) {
    const int i = parse_int(r[0], path);
    if (i < 0 || i >= c.rows() || seen[static_cast<std::size_t>(i)])
      throw InvalidInput("coordinate node ids must be 0..N-1 without repeats in " + path.string());
    seen[static_cast<std::size_t>(i)] = true;
    c(i, 0) = parse_double(r[1], path);
    c(i, 1) = parse_double(r[2], path);
  }
  return c;
}

void write_partition(const fs::path& path, const Partition& p) {
  CsvTable t{{"subset_id", "node_id"}, {}};
  for (int s = 0; s < p.n_subsets(); ++s)
    for (int i : p[static_cast<std::size_t>(s)].indices()) t.rows.push_back({std::to_string(s), std::to_string(i)});
  write_csv(path, t, {"subset_id", "node_id"});
}

Partition read_partition(const fs::path& path) {
  const auto t = read_csv(path);
  require_header(t, {"subset_id", "node_id"}, path);
  std::map<int, std::vector<int>> groups;
  int max_node = -1;
  for (const auto& r : t.rows) {
    const int s = parse_int(r[0], path), i = parse_int(r[1], path);
    groups[s].push_back(i);
    max_node = std::max(max_node, i);
  }
  if (groups.empty()) throw InvalidInput("empty partition file " + path.string());
  if (groups.begin()->first != 0 || groups.rbegin()->first != static_cast<int>(groups.size()) - 1)
    throw InvalidInput("subset ids must be 0..M-1 in " + path.string());
  std::vector<SamplingSet> subsets;
  for (auto& [id, nodes] : groups) subsets.emplace_back(std::move(nodes), max_node + 1);
  return Partition(std::move(subsets));
}

void write_pdca_trace(const fs::path& path, const std::vector<PdcaTraceRow>& trace) {
  CsvTable t{{"iter", "f", "h", "F"}, {}};
  for (const auto& r : trace)
    t.rows.push_back({std::to_string(r.iter), format_double(r.f), format_double(r.h), format_double(r.total)});
  write_csv(path, t, {"iter", "f", "h", "F"});
}

void write_metrics(const fs::path& path, const std::vector<MetricsRecord>& records) {
  CsvTable t{{"t", "subset_id", "mse_db", "epoch", "cond"}, {}};
  for (const auto& r : records)
    t.rows.push_back({std::to_string(r.t), std::to_string(r.subset_id), format_double(r.mse_db),
                      std::to_string(r.epoch), format_double(r.cond)});
  write_csv(path, t, {"t", "subset_id", "mse_db", "epoch", "cond"});
}

std::vector<MetricsRecord> read_metrics(const fs::path& path) {
  const auto t = read_csv(path);
  require_header(t, {"t", "subset_id", "mse_db", "epoch", "cond"}, path);
  std::vector<MetricsRecord> out;
  for (const auto& r : t.rows)
    out.push_back({parse_int(r[0], path), parse_int(r[1], path), parse_double(r[2], path), parse_int(r[3], path),
                   parse_double(r[4], path)});
  return out;
}

void write_signal_trace(const fs::path& path, const MatrixXd& signals) {
  CsvTable t{{"t", "node", "value"}, {}};
  for (Eigen::Index c = 0; c < signals.cols(); ++c)
    for (Eigen::Index i = 0; i < signals.rows(); ++i)
      t.rows.push_back({std::to_string(c), std::to_string(i), format_double(signals(i, c))});
  write_csv(path, t, {"t", "node", "value"});
}

MatrixXd read_signal_trace(const fs::path& path) {
  const auto t = read_csv(path);
  require_header(t, {"t", "node", "value"}, path);
  int max_t = -1, max_n = -1;
  for (const auto& r : t.rows) {
    max_t = std::max(max_t, parse_int(r[0], path));
    max_n = std::max(max_n, parse_int(r[1], path));
  }
  if (max_t < 0) throw InvalidInput("empty signal trace " + path.string());
  MatrixXd m = MatrixXd::Constant(max_n + 1, max_t + 1, std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : t.rows) {
    const int tt = parse_int(r[0], path), n = parse_int(r[1], path);
    if (tt < 0 || n < 0) throw InvalidInput("negative index in " + path.string());
    m(n, tt) = parse_double(r[2], path);
  }
  if (!m.allFinite()) throw InvalidInput("signal trace is incomplete or non-finite in " + path.string());
  return m;
}

void write_matrix(const fs::path& path, const MatrixXd& m) {
  auto out = open_out(path);
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_double(m(i, j));
    out << '\n';
  }
}

MatrixXd read_matrix(const fs::path& path) {
  auto in = open_in(path);
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw InvalidInput("bad matrix header in " + path.string());
  MatrixXd m(rows, cols);
  std::string tok;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> tok)) throw InvalidInput("matrix file is truncated: " + path.string());
      m(i, j) = parse_double(tok, path);
    }
  if (in >> tok) throw InvalidInput("matrix file has trailing data: " + path.string());
  return m;
}

}  // namespace gnp::io
