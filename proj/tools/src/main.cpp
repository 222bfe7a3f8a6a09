// rensem: command-line front-end for the random-effects network SEM library.
//
// Subcommands: simulate, fit, effects, replicate, graph-stats, analyze.
// Every failure exits nonzero with a one-line JSON error object on stderr.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rensem/estimands.hpp"
#include "rensem/experiments.hpp"
#include "rensem/fit.hpp"
#include "rensem/io.hpp"
#include "rensem/likelihood.hpp"
#include "rensem/model.hpp"
#include "rensem/network.hpp"
#include "rensem/rng.hpp"

namespace {

using nlohmann::json;

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    if (content.empty() || content.back() != '\n') std::cout << '\n';
  } else {
    rensem::write_text_file(path, content);
  }
}

void emit_json(const std::string& path, const json& j) { emit(path, j.dump(2) + "\n"); }

// ---- shared option bundles -------------------------------------------------

struct NetArgs {
  std::string edges;
  int ring = 0;
  std::string er;  // "N,TARGET_DEGREE[,SEED]"
};

void add_net_opts(CLI::App* sub, NetArgs& args) {
  auto* grp = sub->add_option_group("network", "network source (exactly one)");
  grp->add_option("--edges", args.edges, "edge CSV, one 'id_a,id_b' line per undirected edge")
      ->check(CLI::ExistingFile);
  grp->add_option("--ring", args.ring, "ring (cycle) network on N nodes")
      ->check(CLI::PositiveNumber);
  grp->add_option("--er", args.er, "Erdos-Renyi network 'N,TARGET_DEGREE[,SEED]' (seed default 1)");
  grp->require_option(1);
}

std::shared_ptr<const rensem::Network> resolve_net(const NetArgs& args,
                                                  std::vector<long long>* ids = nullptr) {
  if (!args.edges.empty()) {
    rensem::LoadedEdges loaded = rensem::load_edge_list(args.edges);
    if (ids) *ids = loaded.ids;
    return std::make_shared<const rensem::Network>(std::move(loaded.net));
  }
  if (args.ring > 0) return std::make_shared<const rensem::Network>(rensem::gen_ring(args.ring));
  if (!args.er.empty()) {
    std::vector<std::string> parts;
    std::string tok;
    std::istringstream is(args.er);
    while (std::getline(is, tok, ',')) parts.push_back(tok);
    if (parts.size() < 2 || parts.size() > 3) {
      throw std::invalid_argument("--er expects 'N,TARGET_DEGREE[,SEED]', got '" + args.er + "'");
    }
    const int n = std::stoi(parts[0]);
    const double deg = std::stod(parts[1]);
    const std::uint64_t seed = parts.size() == 3 ? std::stoull(parts[2]) : 1;
    return std::make_shared<const rensem::Network>(rensem::gen_erdos_renyi(n, deg, seed));
  }
  throw std::invalid_argument("one of --edges/--ring/--er is required");
}

struct ShiftArgs {
  rensem::ExposureShift shift;
};

void add_shift_opts(CLI::App* sub, ShiftArgs& args) {
  sub->add_option("--a-from", args.shift.a_from, "baseline own exposure")->capture_default_str();
  sub->add_option("--a-to", args.shift.a_to, "counterfactual own exposure")->capture_default_str();
  sub->add_option("--s-from", args.shift.s_from, "baseline neighborhood exposure share in [0,1]")
      ->capture_default_str();
  sub->add_option("--s-to", args.shift.s_to, "counterfactual neighborhood share in [0,1]")
      ->capture_default_str();
}

void add_method_opt(CLI::App* sub, std::string& method) {
  sub->add_option("--method", method, "variance method: general-delta | closed-form")
      ->capture_default_str()
      ->check(CLI::IsMember({"general-delta", "closed-form"}));
}

json degree_stats(const rensem::Network& net) {
  const auto& deg = net.degrees();
  const auto [lo, hi] = std::minmax_element(deg.begin(), deg.end());
  const double mean =
      std::accumulate(deg.begin(), deg.end(), 0.0) / static_cast<double>(deg.size());
  return json{{"min", *lo}, {"max", *hi}, {"mean", mean}};
}

json network_summary(const rensem::Network& net) {
  return json{{"n", net.size()},
              {"edges", static_cast<long long>(net.edges().size())},
              {"degree", degree_stats(net)}};
}

// ---- subcommand implementations --------------------------------------------

struct SimulateArgs {
  NetArgs net;
  std::string params_path;
  std::uint64_t seed = 1;
  double conf_mean = 0.0;
  double conf_sd = 1.0;
  std::string out_nodes;
  std::string out_edges;
};

void run_simulate(const SimulateArgs& args) {
  const rensem::RenSemParams params =
      rensem::params_from_json(json::parse(rensem::read_text_file(args.params_path)));
  std::vector<long long> ids;
  const auto net = resolve_net(args.net, &ids);
  rensem::ConfounderSpec conf{params.p(), args.conf_mean, args.conf_sd};
  // Stream 1 of the master seed = replication 0 of an experiment with the
  // same seed on this network.
  const rensem::Dataset data =
      rensem::simulate_dataset(net, params, conf, rensem::split_seed(args.seed, 1));
  const rensem::NodeTable table =
      rensem::make_node_table(data, ids.empty() ? nullptr : &ids);
  rensem::save_node_table(table, args.out_nodes);
  if (!args.out_edges.empty()) {
    rensem::save_edge_list(*net, args.out_edges, ids.empty() ? nullptr : &ids);
  }
}

struct FitArgs {
  std::string edges;
  std::string nodes;
  std::string out;
};

void run_fit(const FitArgs& args) {
  const rensem::IngestResult in = rensem::ingest(args.edges, args.nodes);
  const rensem::FitResult fit = rensem::fit_mle(in.data);
  emit_json(args.out, rensem::fit_result_to_json(fit));
}

struct EffectsArgs {
  std::string fit_path;
  std::string edges;
  ShiftArgs shift;
  std::string method = "general-delta";
  std::string out;
  std::string csv;
};

void run_effects(const EffectsArgs& args) {
  const rensem::FitResult fit =
      rensem::fit_result_from_json(json::parse(rensem::read_text_file(args.fit_path)));
  const rensem::LoadedEdges loaded = rensem::load_edge_list(args.edges);
  args.shift.shift.validate();
  const rensem::EstimandReport report = rensem::effects_report(
      fit, loaded.net, args.shift.shift, rensem::variance_method_from_string(args.method));
  emit_json(args.out, rensem::report_to_json(report));
  if (!args.csv.empty()) rensem::write_text_file(args.csv, rensem::report_to_csv(report));
}

struct ReplicateArgs {
  std::string config_path;
  std::string preset;
  double scale = 0.1;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  std::string meta;
};

void run_replicate(const ReplicateArgs& args) {
  std::vector<rensem::SizedMetrics> metrics;
  std::uint64_t seed_used = args.seed.value_or(1);
  std::string source;
  if (!args.config_path.empty()) {
    rensem::ExperimentConfig config =
        rensem::experiment_config_from_json(json::parse(rensem::read_text_file(args.config_path)));
    if (args.seed) config.seed = *args.seed;
    if (args.workers) config.workers = *args.workers;
    seed_used = config.seed;
    source = "config:" + args.config_path;
    metrics.push_back({config.network.n, rensem::run_experiment(config)});
  } else {
    const rensem::BenchmarkPreset preset = args.preset == "ring"
                                               ? rensem::BenchmarkPreset::ring
                                               : rensem::BenchmarkPreset::erdos_renyi;
    source = "preset:" + args.preset;
    metrics = rensem::reproduce_benchmark(preset, args.scale, seed_used, args.workers.value_or(0));
  }
  emit(args.out, rensem::metrics_to_csv(metrics));
  if (!args.meta.empty()) {
    emit_json(args.meta, rensem::metrics_metadata_json(metrics, seed_used, source));
  }
}

struct GraphStatsArgs {
  NetArgs net;
  ShiftArgs shift;
  std::string out;
};

void run_graph_stats(const GraphStatsArgs& args) {
  const auto net = resolve_net(args.net);
  args.shift.shift.validate();
  const rensem::NetworkDeltas d = rensem::network_deltas(*net, args.shift.shift);
  json j = network_summary(*net);
  j["shift"] = rensem::shift_to_json(args.shift.shift);
  j["deltas"] = {{"delta1", d.delta1}, {"delta2", d.delta2}, {"delta3", d.delta3}};
  emit_json(args.out, j);
}

struct AnalyzeArgs {
  std::string edges;
  std::string nodes;
  bool standardize = false;
  bool log1p_outcome = false;
  ShiftArgs shift;
  std::string method = "general-delta";
  std::string out;
  std::string csv;
  std::string fit_out;
};

void run_analyze(const AnalyzeArgs& args) {
  rensem::TransformOptions transforms;
  transforms.standardize = args.standardize;
  transforms.log1p_outcome = args.log1p_outcome;
  const rensem::IngestResult in = rensem::ingest(args.edges, args.nodes, transforms);
  args.shift.shift.validate();
  const rensem::FitResult fit = rensem::fit_mle(in.data);
  const rensem::EstimandReport report = rensem::effects_report(
      fit, *in.net, args.shift.shift, rensem::variance_method_from_string(args.method));
  json j{{"network", network_summary(*in.net)},
         {"fit", rensem::fit_result_to_json(fit)},
         {"effects", rensem::report_to_json(report, &in.transforms)}};
  emit_json(args.out, j);
  if (!args.csv.empty()) rensem::write_text_file(args.csv, rensem::report_to_csv(report));
  if (!args.fit_out.empty()) {
    rensem::write_text_file(args.fit_out, rensem::fit_result_to_json(fit).dump(2) + "\n");
  }
}

// ---- error reporting -------------------------------------------------------

json error_json(const std::exception& e) {
  std::string type = "runtime";
  json extra;
  if (auto* iso = dynamic_cast<const rensem::IsolatedNodesError*>(&e)) {
    type = "isolated-nodes";
    extra["nodes"] = iso->nodes;
  } else if (dynamic_cast<const rensem::RankDeficiencyError*>(&e)) {
    type = "rank-deficiency";
  } else if (dynamic_cast<const rensem::SeparationError*>(&e)) {
    type = "separation";
  } else if (dynamic_cast<const rensem::NonConvergenceError*>(&e)) {
    type = "non-convergence";
  } else if (auto* sing = dynamic_cast<const rensem::SingularInformationError*>(&e)) {
    type = "singular-information";
    extra["condition"] = sing->condition;
  } else if (dynamic_cast<const json::exception*>(&e)) {
    type = "json";
  } else if (dynamic_cast<const std::invalid_argument*>(&e)) {
    type = "invalid-argument";
  }
  json err{{"type", type}, {"message", e.what()}};
  for (auto& [k, v] : extra.items()) err[k] = v;
  return json{{"error", err}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-effects network SEM: simulation, fitting, and effect estimation"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sub_sim = app.add_subcommand("simulate", "Draw one dataset from the model");
  sub_sim->add_option("--params", sim.params_path, "model parameter JSON")
      ->required()
      ->check(CLI::ExistingFile);
  add_net_opts(sub_sim, sim.net);
  sub_sim->add_option("--seed", sim.seed, "master RNG seed")->capture_default_str();
  sub_sim->add_option("--conf-mean", sim.conf_mean, "confounder mean")->capture_default_str();
  sub_sim->add_option("--conf-sd", sim.conf_sd, "confounder standard deviation")
      ->capture_default_str();
  sub_sim->add_option("--out-nodes", sim.out_nodes, "node table CSV to write")->required();
  sub_sim->add_option("--out-edges", sim.out_edges, "edge list CSV to write");
  sub_sim->callback([&sim] { run_simulate(sim); });

  FitArgs fit;
  auto* sub_fit = app.add_subcommand("fit", "Maximum-likelihood fit of a dataset");
  sub_fit->add_option("--edges", fit.edges, "edge list CSV")->required()->check(CLI::ExistingFile);
  sub_fit->add_option("--nodes", fit.nodes, "node table CSV")->required()->check(CLI::ExistingFile);
  sub_fit->add_option("--out", fit.out, "fit JSON output ('-' = stdout)")->capture_default_str();
  sub_fit->callback([&fit] { run_fit(fit); });

  EffectsArgs eff;
  auto* sub_eff = app.add_subcommand("effects", "Effect estimates from a saved fit");
  sub_eff->add_option("--fit", eff.fit_path, "fit JSON produced by 'fit'")
      ->required()
      ->check(CLI::ExistingFile);
  sub_eff->add_option("--edges", eff.edges, "edge list CSV of the fitted network")
      ->required()
      ->check(CLI::ExistingFile);
  add_shift_opts(sub_eff, eff.shift);
  add_method_opt(sub_eff, eff.method);
  sub_eff->add_option("--out", eff.out, "report JSON output ('-' = stdout)");
  sub_eff->add_option("--csv", eff.csv, "also write the report as CSV");
  sub_eff->callback([&eff] { run_effects(eff); });

  ReplicateArgs rep;
  auto* sub_rep = app.add_subcommand("replicate", "Monte-Carlo experiment (metrics CSV)");
  auto* rep_src = sub_rep->add_option_group("source", "experiment source (exactly one)");
  rep_src->add_option("--config", rep.config_path, "experiment config JSON")
      ->check(CLI::ExistingFile);
  rep_src->add_option("--preset", rep.preset, "benchmark preset: ring | er")
      ->check(CLI::IsMember({"ring", "er"}));
  rep_src->require_option(1);
  sub_rep->add_option("--scale", rep.scale, "replication scale for presets (R = 500*scale)")
      ->capture_default_str();
  sub_rep->add_option("--seed", rep.seed, "master RNG seed (overrides config)");
  sub_rep->add_option("--workers", rep.workers, "worker threads, 0 = hardware");
  sub_rep->add_option("--out", rep.out, "metrics CSV output ('-' = stdout)");
  sub_rep->add_option("--meta", rep.meta, "also write run metadata JSON");
  sub_rep->callback([&rep] { run_replicate(rep); });

  GraphStatsArgs gs;
  auto* sub_gs = app.add_subcommand("graph-stats", "Degree and shift-contrast statistics");
  add_net_opts(sub_gs, gs.net);
  add_shift_opts(sub_gs, gs.shift);
  sub_gs->add_option("--out", gs.out, "stats JSON output ('-' = stdout)");
  sub_gs->callback([&gs] { run_graph_stats(gs); });

  AnalyzeArgs an;
  auto* sub_an = app.add_subcommand("analyze", "Ingest, fit, and report effects in one pass");
  sub_an->add_option("--edges", an.edges, "edge list CSV")->required()->check(CLI::ExistingFile);
  sub_an->add_option("--nodes", an.nodes, "node table CSV")->required()->check(CLI::ExistingFile);
  sub_an->add_flag("--standardize", an.standardize, "z-score mediator, outcome and confounders");
  sub_an->add_flag("--log1p-outcome", an.log1p_outcome, "log(1+y) transform before fitting");
  add_shift_opts(sub_an, an.shift);
  add_method_opt(sub_an, an.method);
  sub_an->add_option("--out", an.out, "analysis JSON output ('-' = stdout)");
  sub_an->add_option("--csv", an.csv, "also write the effects table as CSV");
  sub_an->add_option("--fit-out", an.fit_out, "also write the fit JSON");
  sub_an->callback([&an] { run_analyze(an); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", {{"type", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    const int code = e.get_exit_code();
    return code == 0 ? 2 : code;
  } catch (const std::exception& e) {
    std::cerr << error_json(e).dump() << "\n";
    return 1;
  }
  return 0;
}
