#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rensem/estimands.hpp"
#include "rensem/experiments.hpp"
#include "rensem/fit.hpp"
#include "rensem/model.hpp"
#include "rensem/network.hpp"

namespace rensem {

// ---- edge lists ------------------------------------------------------------
// Text format: one undirected edge per line, "id_a,id_b", nonnegative integer
// ids. Self-loops are ignored (the diagonal is implicit), duplicates collapse.

struct LoadedEdges {
  Network net;
  std::vector<long long> ids;  // node index -> original id (sorted ascending)
};

// Nodes are the sorted distinct ids appearing in the file.
LoadedEdges load_edge_list(const std::string& path);

// Writes edges as "ids[i],ids[j]" (i < j); identity labels when ids is null.
void save_edge_list(const Network& net, const std::string& path,
                    const std::vector<long long>* ids = nullptr);

// ---- node tables -----------------------------------------------------------
// CSV with header id,exposure,mediator,outcome,c1,...,cp (p >= 0 inferred).

struct NodeTable {
  std::vector<long long> ids;
  Eigen::VectorXd a, m, y;
  Eigen::MatrixXd c;
};

NodeTable load_node_table(const std::string& path);
void save_node_table(const NodeTable& table, const std::string& path);
NodeTable make_node_table(const Dataset& data, const std::vector<long long>* ids = nullptr);

// ---- ingestion -------------------------------------------------------------

struct TransformOptions {
  bool standardize = false;    // z-score mediator, outcome and confounders
  bool log1p_outcome = false;  // log(1+y) before any standardization
};

struct ColumnScale {
  double mean = 0.0;
  double sd = 1.0;
};

struct TransformLog {
  bool standardize = false;
  bool log1p_outcome = false;
  ColumnScale mediator, outcome;
  std::vector<ColumnScale> confounders;
};

struct IngestResult {
  std::shared_ptr<const Network> net;
  Dataset data;
  std::vector<long long> ids;  // node index (table row order) -> original id
  TransformLog transforms;
};

// Binds an edge list to a node table: every edge endpoint must be a table id,
// every table row must have at least one edge, exposure must be binary.
IngestResult ingest(const std::string& edge_path, const std::string& node_path,
                    const TransformOptions& transforms = {});

// ---- JSON ------------------------------------------------------------------

nlohmann::json params_to_json(const RenSemParams& params);
RenSemParams params_from_json(const nlohmann::json& j);

nlohmann::json fit_result_to_json(const FitResult& fit);
FitResult fit_result_from_json(const nlohmann::json& j);

nlohmann::json shift_to_json(const ExposureShift& shift);
ExposureShift shift_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const EstimandReport& report,
                              const TransformLog* transforms = nullptr);
// Columns: estimand,estimate,se,ci_lo,ci_hi,p
std::string report_to_csv(const EstimandReport& report);

nlohmann::json experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

// Metrics table rows: size,effect,actual,bias,rrmse,ese,ase,coverage
// (absent rrmse/ese render as empty cells).
std::string metrics_to_csv(const std::vector<SizedMetrics>& metrics);
nlohmann::json metrics_metadata_json(const std::vector<SizedMetrics>& metrics,
                                     std::uint64_t seed, const std::string& source);

// ---- small file helpers ----------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace rensem
