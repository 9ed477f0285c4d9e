#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gnp/scheduler.hpp"

namespace gnp::io {

namespace fs = std::filesystem;

/// Header plus rows of already formatted cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Every row must match the header width; header names must be unique and
  /// nonempty. Cells in columns listed as numeric must parse as doubles.
  void validate(const std::vector<std::string>& numeric_columns = {}) const;
};

/// Shortest round-trip decimal form ("%.17g"), "inf"/"-inf"/"nan" otherwise.
std::string format_double(double v);

void write_csv(const fs::path& path, const CsvTable& table, const std::vector<std::string>& numeric_columns);
CsvTable read_csv(const fs::path& path);
/// Rejects tables whose header differs from `expected`.
void require_header(const CsvTable& table, const std::vector<std::string>& expected, const fs::path& path);

/// `# nodes N` then one `i j w` line per undirected edge (i < j).
void write_edge_list(const fs::path& path, const Graph& g);
/// Duplicate directed entries must agree on the weight.
Graph read_edge_list(const fs::path& path, const fs::path& coords_path = {});

void write_coords(const fs::path& path, const Coords& coords);  // node,x,y
Coords read_coords(const fs::path& path);

void write_partition(const fs::path& path, const Partition& p);  // subset_id,node_id
Partition read_partition(const fs::path& path);

void write_pdca_trace(const fs::path& path, const std::vector<PdcaTraceRow>& trace);  // iter,f,h,F

void write_metrics(const fs::path& path, const std::vector<MetricsRecord>& records);  // t,subset_id,mse_db,epoch,cond
std::vector<MetricsRecord> read_metrics(const fs::path& path);

void write_signal_trace(const fs::path& path, const MatrixXd& signals);  // t,node,value
MatrixXd read_signal_trace(const fs::path& path);

/// First line "rows cols", then one whitespace-separated row per line.
void write_matrix(const fs::path& path, const MatrixXd& m);
MatrixXd read_matrix(const fs::path& path);

}  // namespace gnp::io
