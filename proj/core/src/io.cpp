#include "rensem/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rensem {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

long long parse_id(const std::string& tok, const std::string& where) {
  if (tok.empty()) throw std::runtime_error(where + ": empty id field");
  for (char ch : tok) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) {
      throw std::runtime_error(where + ": id must be a nonnegative integer, got '" + tok + "'");
    }
  }
  try {
    return std::stoll(tok);
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": id out of range: '" + tok + "'");
  }
}

double parse_double(const std::string& tok, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": expected a number, got '" + tok + "'");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

bool looks_like_header(const std::string& line) {
  return std::any_of(line.begin(), line.end(),
                     [](char ch) { return std::isalpha(static_cast<unsigned char>(ch)); });
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing file: " + path);
}

LoadedEdges load_edge_list(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<std::pair<long long, long long>> raw;
  std::set<long long> id_set;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string line = trim(lines[ln]);
    if (line.empty()) continue;
    if (ln == 0 && looks_like_header(line)) continue;
    const auto fields = split_csv(line);
    const std::string where = path + ":" + std::to_string(ln + 1);
    if (fields.size() != 2) {
      throw std::runtime_error(where + ": expected 'id_a,id_b', got '" + line + "'");
    }
    const long long a = parse_id(fields[0], where);
    const long long b = parse_id(fields[1], where);
    raw.emplace_back(a, b);
    id_set.insert(a);
    id_set.insert(b);
  }
  if (id_set.size() < 2) {
    throw std::runtime_error(path + ": edge list must reference at least 2 distinct nodes");
  }
  // Report isolation in terms of the file's own ids; an id whose only
  // appearances are self-loops would otherwise surface as an internal index.
  std::set<long long> connected;
  for (const auto& [a, b] : raw) {
    if (a != b) {
      connected.insert(a);
      connected.insert(b);
    }
  }
  if (connected.size() < id_set.size()) {
    std::ostringstream os;
    os << path << ": ids without any edge (self-loops are ignored): [";
    std::size_t shown = 0;
    for (long long id : id_set) {
      if (connected.count(id)) continue;
      if (shown == 20) {
        os << ",...";
        break;
      }
      if (shown++) os << ",";
      os << id;
    }
    os << "]";
    throw std::runtime_error(os.str());
  }
  LoadedEdges out{Network::from_edges(2, {{0, 1}}), {}};  // placeholder, rebuilt below
  out.ids.assign(id_set.begin(), id_set.end());
  std::map<long long, int> index;
  for (std::size_t i = 0; i < out.ids.size(); ++i) index[out.ids[i]] = static_cast<int>(i);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(raw.size());
  for (const auto& [a, b] : raw) edges.emplace_back(index[a], index[b]);
  out.net = Network::from_edges(static_cast<int>(out.ids.size()), edges);
  return out;
}

void save_edge_list(const Network& net, const std::string& path,
                    const std::vector<long long>* ids) {
  if (ids && static_cast<int>(ids->size()) != net.size()) {
    throw std::invalid_argument("save_edge_list: id vector length mismatch");
  }
  std::ostringstream os;
  for (const auto& [i, j] : net.edges()) {
    const long long a = ids ? (*ids)[static_cast<std::size_t>(i)] : i;
    const long long b = ids ? (*ids)[static_cast<std::size_t>(j)] : j;
    os << a << "," << b << "\n";
  }
  write_text_file(path, os.str());
}

NodeTable load_node_table(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty node table");
  const auto header = split_csv(trim(lines[0]));
  const std::vector<std::string> fixed = {"id", "exposure", "mediator", "outcome"};
  if (header.size() < fixed.size()) {
    throw std::runtime_error(path + ": header must start with id,exposure,mediator,outcome");
  }
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    if (header[k] != fixed[k]) {
      throw std::runtime_error(path + ": header column " + std::to_string(k + 1) + " must be '" +
                               fixed[k] + "', got '" + header[k] + "'");
    }
  }
  const int p = static_cast<int>(header.size() - fixed.size());
  for (int k = 0; k < p; ++k) {
    const std::string expect = "c" + std::to_string(k + 1);
    if (header[fixed.size() + static_cast<std::size_t>(k)] != expect) {
      throw std::runtime_error(path + ": confounder column " + std::to_string(k + 1) +
                               " must be named '" + expect + "'");
    }
  }

  NodeTable t;
  std::vector<std::array<double, 3>> amy;
  std::vector<std::vector<double>> cs;
  std::set<long long> seen;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string line = trim(lines[ln]);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    const std::string where = path + ":" + std::to_string(ln + 1);
    if (fields.size() != header.size()) {
      throw std::runtime_error(where + ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    const long long id = parse_id(fields[0], where);
    if (!seen.insert(id).second) {
      throw std::runtime_error(where + ": duplicate node id " + std::to_string(id));
    }
    t.ids.push_back(id);
    amy.push_back({parse_double(fields[1], where), parse_double(fields[2], where),
                   parse_double(fields[3], where)});
    std::vector<double> crow(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) {
      crow[static_cast<std::size_t>(k)] =
          parse_double(fields[4 + static_cast<std::size_t>(k)], where);
    }
    cs.push_back(std::move(crow));
  }
  const int n = static_cast<int>(t.ids.size());
  if (n < 2) throw std::runtime_error(path + ": node table needs at least 2 rows");
  t.a.resize(n);
  t.m.resize(n);
  t.y.resize(n);
  t.c.resize(n, p);
  for (int i = 0; i < n; ++i) {
    t.a[i] = amy[static_cast<std::size_t>(i)][0];
    t.m[i] = amy[static_cast<std::size_t>(i)][1];
    t.y[i] = amy[static_cast<std::size_t>(i)][2];
    for (int k = 0; k < p; ++k) t.c(i, k) = cs[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  return t;
}

void save_node_table(const NodeTable& table, const std::string& path) {
  const int n = static_cast<int>(table.ids.size());
  const int p = static_cast<int>(table.c.cols());
  if (table.a.size() != n || table.m.size() != n || table.y.size() != n || table.c.rows() != n) {
    throw std::invalid_argument("save_node_table: inconsistent column lengths");
  }
  std::ostringstream os;
  os << "id,exposure,mediator,outcome";
  for (int k = 0; k < p; ++k) os << ",c" << (k + 1);
  os << "\n";
  for (int i = 0; i < n; ++i) {
    os << table.ids[static_cast<std::size_t>(i)] << "," << fmt(table.a[i]) << ","
       << fmt(table.m[i]) << "," << fmt(table.y[i]);
    for (int k = 0; k < p; ++k) os << "," << fmt(table.c(i, k));
    os << "\n";
  }
  write_text_file(path, os.str());
}

NodeTable make_node_table(const Dataset& data, const std::vector<long long>* ids) {
  NodeTable t;
  const int n = data.size();
  if (ids) {
    if (static_cast<int>(ids->size()) != n) {
      throw std::invalid_argument("make_node_table: id vector length mismatch");
    }
    t.ids = *ids;
  } else {
    t.ids.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t.ids[static_cast<std::size_t>(i)] = i;
  }
  t.a = data.a;
  t.m = data.m;
  t.y = data.y;
  t.c = data.c;
  return t;
}

IngestResult ingest(const std::string& edge_path, const std::string& node_path,
                    const TransformOptions& transforms) {
  NodeTable table = load_node_table(node_path);
  const int n = static_cast<int>(table.ids.size());
  std::map<long long, int> index;
  for (int i = 0; i < n; ++i) index[table.ids[static_cast<std::size_t>(i)]] = i;

  // Edge endpoints resolve against the node table (row order = node order).
  const std::vector<std::string> lines = read_lines(edge_path);
  std::vector<std::pair<int, int>> edges;
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string line = trim(lines[ln]);
    if (line.empty()) continue;
    if (ln == 0 && looks_like_header(line)) continue;
    const auto fields = split_csv(line);
    const std::string where = edge_path + ":" + std::to_string(ln + 1);
    if (fields.size() != 2) {
      throw std::runtime_error(where + ": expected 'id_a,id_b', got '" + line + "'");
    }
    const long long a = parse_id(fields[0], where);
    const long long b = parse_id(fields[1], where);
    for (long long id : {a, b}) {
      if (!index.count(id)) {
        throw std::runtime_error(where + ": edge endpoint " + std::to_string(id) +
                                 " is not a node-table id");
      }
    }
    if (a == b) continue;
    const int ia = index[a], ib = index[b];
    if (ia != ib) {
      edges.emplace_back(ia, ib);
      ++degree[static_cast<std::size_t>(ia)];
      ++degree[static_cast<std::size_t>(ib)];
    }
  }
  std::vector<long long> missing;
  for (int i = 0; i < n; ++i) {
    if (degree[static_cast<std::size_t>(i)] == 0) {
      missing.push_back(table.ids[static_cast<std::size_t>(i)]);
    }
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << node_path << ": node-table rows without any edge: [";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
      if (i) os << ",";
      os << missing[i];
    }
    if (missing.size() > 20) os << ",...";
    os << "]";
    throw std::runtime_error(os.str());
  }

  IngestResult out;
  out.net = std::make_shared<const Network>(Network::from_edges(n, edges));
  out.ids = table.ids;
  out.transforms.standardize = transforms.standardize;
  out.transforms.log1p_outcome = transforms.log1p_outcome;

  Eigen::VectorXd y = table.y;
  if (transforms.log1p_outcome) {
    for (int i = 0; i < n; ++i) {
      if (!(y[i] > -1.0)) {
        throw std::runtime_error(node_path + ": log1p transform needs outcome > -1, got " +
                                 std::to_string(y[i]) + " for id " +
                                 std::to_string(table.ids[static_cast<std::size_t>(i)]));
      }
      y[i] = std::log1p(y[i]);
    }
  }
  Eigen::VectorXd m = table.m;
  Eigen::MatrixXd c = table.c;
  auto zscore = [n](Eigen::Ref<Eigen::VectorXd> v, const std::string& what) {
    const double mean = v.mean();
    const double ss = (v.array() - mean).square().sum();
    const double sd = std::sqrt(ss / std::max(1, n - 1));
    if (!(sd > 0.0)) {
      throw std::runtime_error("standardize: column '" + what + "' is constant (sd = 0)");
    }
    v = ((v.array() - mean) / sd).matrix();
    return ColumnScale{mean, sd};
  };
  if (transforms.standardize) {
    out.transforms.mediator = zscore(m, "mediator");
    out.transforms.outcome = zscore(y, "outcome");
    for (int k = 0; k < static_cast<int>(c.cols()); ++k) {
      Eigen::VectorXd col = c.col(k);
      out.transforms.confounders.push_back(zscore(col, "c" + std::to_string(k + 1)));
      c.col(k) = col;
    }
  }

  out.data.net = out.net;
  out.data.a = table.a;
  out.data.m = m;
  out.data.y = y;
  out.data.c = c;
  out.data.validate();
  return out;
}

// ---- JSON ------------------------------------------------------------------

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array()) throw std::runtime_error("expected array for '" + key + "'");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::runtime_error("'" + key + "' must hold numbers");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) rows.push_back(vec_to_json(m.row(r).transpose()));
  return rows;
}

Eigen::MatrixXd mat_from_json(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) throw std::runtime_error("expected matrix for '" + key + "'");
  const int rows = static_cast<int>(j.size());
  Eigen::MatrixXd m;
  for (int r = 0; r < rows; ++r) {
    const Eigen::VectorXd row = vec_from_json(j[static_cast<std::size_t>(r)], key);
    if (r == 0) m.resize(rows, row.size());
    if (row.size() != m.cols()) throw std::runtime_error("ragged matrix for '" + key + "'");
    m.row(r) = row.transpose();
  }
  return m;
}

const nlohmann::json& need(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) throw std::runtime_error("missing JSON key '" + key + "'");
  return j.at(key);
}

double need_number(const nlohmann::json& j, const std::string& key) {
  const nlohmann::json& v = need(j, key);
  if (!v.is_number()) throw std::runtime_error("JSON key '" + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

nlohmann::json params_to_json(const RenSemParams& params) {
  return nlohmann::json{{"beta", vec_to_json(params.beta)},
                        {"gamma", vec_to_json(params.gamma)},
                        {"alpha", vec_to_json(params.alpha)},
                        {"var_y", params.var_y},
                        {"var_by", params.var_by},
                        {"var_m", params.var_m},
                        {"var_bm", params.var_bm}};
}

RenSemParams params_from_json(const nlohmann::json& j) {
  RenSemParams params;
  params.beta = vec_from_json(need(j, "beta"), "beta");
  params.gamma = vec_from_json(need(j, "gamma"), "gamma");
  params.alpha = vec_from_json(need(j, "alpha"), "alpha");
  params.var_y = need_number(j, "var_y");
  params.var_by = need_number(j, "var_by");
  params.var_m = need_number(j, "var_m");
  params.var_bm = need_number(j, "var_bm");
  params.validate();
  return params;
}

nlohmann::json fit_result_to_json(const FitResult& fit) {
  const ParameterLayout& lay = fit.layout;
  auto se_slice = [&](int offset, int len) {
    return vec_to_json(fit.std_errors.segment(offset, len));
  };
  return nlohmann::json{
      {"p", lay.p()},
      {"params", params_to_json(fit.params)},
      {"std_errors",
       {{"beta", se_slice(lay.beta(0), lay.n_beta())},
        {"gamma", se_slice(lay.gamma(0), lay.n_gamma())},
        {"alpha", se_slice(lay.alpha(0), lay.n_alpha())},
        {"var_y", fit.std_errors[lay.var_y()]},
        {"var_by", fit.std_errors[lay.var_by()]},
        {"var_m", fit.std_errors[lay.var_m()]},
        {"var_bm", fit.std_errors[lay.var_bm()]}}},
      {"loglik", fit.loglik},
      {"converged", fit.converged},
      {"gradient_norm", fit.gradient_norm},
      {"iterations",
       {{"outcome", fit.iterations_y}, {"mediator", fit.iterations_m}, {"exposure", fit.iterations_a}}},
      {"boundary",
       {{"var_y", fit.boundary_var_y},
        {"var_by", fit.boundary_var_by},
        {"var_m", fit.boundary_var_m},
        {"var_bm", fit.boundary_var_bm}}},
      {"info", mat_to_json(fit.info)},
      {"info_inv", mat_to_json(fit.info_inv)}};
}

FitResult fit_result_from_json(const nlohmann::json& j) {
  FitResult fit;
  fit.params = params_from_json(need(j, "params"));
  fit.layout = ParameterLayout(fit.params.p());
  fit.loglik = need_number(j, "loglik");
  fit.converged = need(j, "converged").get<bool>();
  fit.gradient_norm = need_number(j, "gradient_norm");
  const nlohmann::json& iters = need(j, "iterations");
  fit.iterations_y = need(iters, "outcome").get<int>();
  fit.iterations_m = need(iters, "mediator").get<int>();
  fit.iterations_a = need(iters, "exposure").get<int>();
  const nlohmann::json& boundary = need(j, "boundary");
  fit.boundary_var_y = need(boundary, "var_y").get<bool>();
  fit.boundary_var_by = need(boundary, "var_by").get<bool>();
  fit.boundary_var_m = need(boundary, "var_m").get<bool>();
  fit.boundary_var_bm = need(boundary, "var_bm").get<bool>();
  fit.info = mat_from_json(need(j, "info"), "info");
  fit.info_inv = mat_from_json(need(j, "info_inv"), "info_inv");
  const int k = fit.layout.size();
  if (fit.info.rows() != k || fit.info.cols() != k || fit.info_inv.rows() != k ||
      fit.info_inv.cols() != k) {
    throw std::runtime_error("fit JSON: information matrices must be " + std::to_string(k) + "x" +
                             std::to_string(k));
  }
  fit.std_errors = fit.info_inv.diagonal().cwiseMax(0.0).cwiseSqrt();
  return fit;
}

nlohmann::json shift_to_json(const ExposureShift& shift) {
  return nlohmann::json{{"a_from", shift.a_from},
                        {"a_to", shift.a_to},
                        {"s_from", shift.s_from},
                        {"s_to", shift.s_to}};
}

ExposureShift shift_from_json(const nlohmann::json& j) {
  ExposureShift shift;
  shift.a_from = need_number(j, "a_from");
  shift.a_to = need_number(j, "a_to");
  shift.s_from = need_number(j, "s_from");
  shift.s_to = need_number(j, "s_to");
  shift.validate();
  return shift;
}

namespace {

nlohmann::json scale_to_json(const ColumnScale& s) {
  return nlohmann::json{{"mean", s.mean}, {"sd", s.sd}};
}

nlohmann::json transforms_to_json(const TransformLog& t) {
  nlohmann::json j{{"standardize", t.standardize}, {"log1p_outcome", t.log1p_outcome}};
  if (t.standardize) {
    j["mediator"] = scale_to_json(t.mediator);
    j["outcome"] = scale_to_json(t.outcome);
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& s : t.confounders) cs.push_back(scale_to_json(s));
    j["confounders"] = cs;
  }
  return j;
}

}  // namespace

nlohmann::json report_to_json(const EstimandReport& report, const TransformLog* transforms) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"name", r.name},
                    {"estimate", r.estimate},
                    {"se", r.se},
                    {"ci_lo", r.ci_lo},
                    {"ci_hi", r.ci_hi},
                    {"p", r.p_value}});
  }
  auto arr6 = [](const std::array<double, 6>& a) {
    nlohmann::json out = nlohmann::json::array();
    for (double v : a) out.push_back(v);
    return out;
  };
  nlohmann::json j{
      {"shift", shift_to_json(report.shift)},
      {"deltas",
       {{"delta1", report.deltas.delta1},
        {"delta2", report.deltas.delta2},
        {"delta3", report.deltas.delta3}}},
      {"variance_method", to_string(report.method)},
      {"estimands", rows},
      {"variance_cross_check",
       {{"general_delta", arr6(report.cross_check.general_delta)},
        {"closed_form", arr6(report.cross_check.closed_form)},
        {"abs_diff", arr6(report.cross_check.abs_diff)},
        {"tau6_divergent", report.cross_check.tau6_divergent},
        {"tau6_rel_diff", report.cross_check.tau6_rel_diff}}}};
  if (transforms) j["transforms"] = transforms_to_json(*transforms);
  return j;
}

std::string report_to_csv(const EstimandReport& report) {
  std::ostringstream os;
  os << "estimand,estimate,se,ci_lo,ci_hi,p\n";
  for (const auto& r : report.rows) {
    os << r.name << "," << fmt10(r.estimate) << "," << fmt10(r.se) << "," << fmt10(r.ci_lo) << ","
       << fmt10(r.ci_hi) << "," << fmt10(r.p_value) << "\n";
  }
  return os.str();
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& config) {
  return nlohmann::json{
      {"network",
       {{"type", config.network.kind == NetworkKind::ring ? "ring" : "erdos-renyi"},
        {"n", config.network.n},
        {"target_degree", config.network.target_degree}}},
      {"replications", config.replications},
      {"params", params_to_json(config.truth)},
      {"confounders",
       {{"p", config.confounders.p}, {"mean", config.confounders.mean}, {"sd", config.confounders.sd}}},
      {"shift", shift_to_json(config.shift)},
      {"variance_method", to_string(config.method)},
      {"seed", config.seed},
      {"workers", config.workers}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig config;
  const nlohmann::json& net = need(j, "network");
  const std::string type = need(net, "type").get<std::string>();
  if (type == "ring") {
    config.network.kind = NetworkKind::ring;
  } else if (type == "erdos-renyi") {
    config.network.kind = NetworkKind::erdos_renyi;
  } else {
    throw std::runtime_error("network type must be 'ring' or 'erdos-renyi', got '" + type + "'");
  }
  config.network.n = need(net, "n").get<int>();
  if (net.contains("target_degree")) config.network.target_degree = net["target_degree"].get<double>();
  config.replications = need(j, "replications").get<int>();
  config.truth = params_from_json(need(j, "params"));
  if (j.contains("confounders")) {
    const nlohmann::json& c = j["confounders"];
    config.confounders.p = need(c, "p").get<int>();
    if (c.contains("mean")) config.confounders.mean = c["mean"].get<double>();
    if (c.contains("sd")) config.confounders.sd = c["sd"].get<double>();
  } else {
    config.confounders.p = config.truth.p();
  }
  if (j.contains("shift")) config.shift = shift_from_json(j["shift"]);
  if (j.contains("variance_method")) {
    config.method = variance_method_from_string(j["variance_method"].get<std::string>());
  }
  if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("workers")) config.workers = j["workers"].get<int>();
  return config;
}

std::string metrics_to_csv(const std::vector<SizedMetrics>& metrics) {
  std::ostringstream os;
  os << "size,effect,actual,bias,rrmse,ese,ase,coverage\n";
  for (const auto& sized : metrics) {
    for (std::size_t k = 0; k < 6; ++k) {
      const EstimandMetrics& m = sized.table.rows[k];
      os << sized.n << ",tau" << (k + 1) << "," << fmt10(m.actual) << "," << fmt10(m.bias) << ",";
      if (m.rrmse) os << fmt10(*m.rrmse);
      os << ",";
      if (m.ese) os << fmt10(*m.ese);
      os << "," << fmt10(m.ase) << "," << fmt10(m.coverage) << "\n";
    }
  }
  return os.str();
}

nlohmann::json metrics_metadata_json(const std::vector<SizedMetrics>& metrics, std::uint64_t seed,
                                     const std::string& source) {
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& sized : metrics) {
    sizes.push_back({{"n", sized.n},
                     {"requested", sized.table.n_requested},
                     {"completed", sized.table.n_completed},
                     {"failed", sized.table.n_failed},
                     {"wall_seconds", sized.table.wall_seconds},
                     {"deltas",
                      {{"delta1", sized.table.deltas.delta1},
                       {"delta2", sized.table.deltas.delta2},
                       {"delta3", sized.table.deltas.delta3}}}});
  }
  return nlohmann::json{{"source", source}, {"seed", seed}, {"sizes", sizes}};
}

}  // namespace rensem
