#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rensem/estimands.hpp"
#include "rensem/model.hpp"
#include "rensem/network.hpp"

namespace rensem {

enum class NetworkKind { ring, erdos_renyi };

struct NetworkSpec {
  NetworkKind kind = NetworkKind::ring;
  int n = 100;
  double target_degree = 10.0;  // erdos_renyi only
};

// Ring ignores the seed; the Erdos-Renyi draw is deterministic in (spec, seed)
// and fixed across the replications of an experiment.
Network build_network(const NetworkSpec& spec, std::uint64_t seed);

struct ExperimentConfig {
  NetworkSpec network;
  int replications = 500;
  RenSemParams truth;
  ConfounderSpec confounders;
  ExposureShift shift;
  VarianceMethod method = VarianceMethod::general_delta;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
};

struct ReplicationRecord {
  int index = 0;
  bool ok = false;
  std::string error;
  std::array<double, 6> estimate{};
  std::array<double, 6> se{};
  double total = 0.0;
  double total_se = 0.0;
};

struct EstimandMetrics {
  double actual = 0.0;
  double bias = 0.0;
  std::optional<double> rrmse;  // absent when |actual| < 1e-12
  std::optional<double> ese;    // absent when fewer than 2 replications
  double ase = 0.0;
  double coverage = 0.0;  // 95% Wald coverage of `actual`
};

struct MetricsTable {
  std::array<EstimandMetrics, 6> rows{};
  NetworkDeltas deltas;
  int n_requested = 0;
  int n_completed = 0;
  int n_failed = 0;
  double wall_seconds = 0.0;
};

// Simulate -> fit -> effects, `replications` times on one fixed network with
// a shared spectral cache. Per-replication RNG streams derive from
// (seed, index), so results are identical for any worker count; failed
// replications are excluded and counted (all failing is an error).
MetricsTable run_experiment(const ExperimentConfig& config,
                            std::vector<ReplicationRecord>* log = nullptr);

// The two benchmark designs: a ring with unit variance components, and an
// Erdos-Renyi network (target degree 10) with random-effect SDs halved.
enum class BenchmarkPreset { ring, erdos_renyi };

RenSemParams benchmark_params(BenchmarkPreset preset);
ExperimentConfig benchmark_config(BenchmarkPreset preset, int n, int replications,
                                  std::uint64_t seed, int workers = 0);

struct SizedMetrics {
  int n = 0;
  MetricsTable table;
};

// Benchmark sweep over N in {100, 200, 800} with R = round(500*scale)
// replications (minimum 1).
std::vector<SizedMetrics> reproduce_benchmark(BenchmarkPreset preset, double scale,
                                              std::uint64_t seed, int workers = 0);

}  // namespace rensem
