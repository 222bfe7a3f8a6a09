#include "rensem/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <thread>

#include "rensem/fit.hpp"
#include "rensem/rng.hpp"

namespace rensem {

Network build_network(const NetworkSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case NetworkKind::ring:
      return gen_ring(spec.n);
    case NetworkKind::erdos_renyi:
      return gen_erdos_renyi(spec.n, spec.target_degree, seed);
  }
  throw std::invalid_argument("build_network: unknown network kind");
}

MetricsTable run_experiment(const ExperimentConfig& config, std::vector<ReplicationRecord>* log) {
  if (config.replications < 1) {
    throw std::invalid_argument("run_experiment: replications must be >= 1, got " +
                                std::to_string(config.replications));
  }
  config.truth.validate();
  config.shift.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const auto net = std::make_shared<const Network>(build_network(config.network, config.seed));
  const auto spectral = std::make_shared<const SpectralCovariance>(*net);
  const NetworkDeltas deltas = network_deltas(*net, config.shift);
  const EstimandValues actual = estimands_point(config.truth, deltas, config.shift);

  const int r_total = config.replications;
  std::vector<ReplicationRecord> records(static_cast<std::size_t>(r_total));

  auto run_one = [&](int r) {
    ReplicationRecord& rec = records[static_cast<std::size_t>(r)];
    rec.index = r;
    try {
      const Dataset data =
          simulate_dataset(net, config.truth, config.confounders, split_seed(config.seed, r + 1));
      const FitResult fit = fit_mle(data, spectral);
      const EstimandReport report = effects_report(fit, deltas, config.shift, config.method);
      for (std::size_t k = 0; k < 6; ++k) {
        rec.estimate[k] = report.rows[k].estimate;
        rec.se[k] = report.rows[k].se;
      }
      rec.total = report.rows[6].estimate;
      rec.total_se = report.rows[6].se;
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
  };

  int workers = config.workers > 0
                    ? config.workers
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, r_total);
  if (workers <= 1) {
    for (int r = 0; r < r_total; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int r = next.fetch_add(1); r < r_total; r = next.fetch_add(1)) run_one(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  MetricsTable table;
  table.deltas = deltas;
  table.n_requested = r_total;
  for (const auto& rec : records) {
    if (rec.ok) {
      ++table.n_completed;
    } else {
      ++table.n_failed;
    }
  }
  if (table.n_completed == 0) {
    std::string first;
    for (const auto& rec : records) {
      if (!rec.ok) {
        first = rec.error;
        break;
      }
    }
    throw std::runtime_error("run_experiment: all " + std::to_string(r_total) +
                             " replications failed; first error: " + first);
  }

  const double nc = static_cast<double>(table.n_completed);
  for (std::size_t k = 0; k < 6; ++k) {
    EstimandMetrics& m = table.rows[k];
    m.actual = actual.tau[k];
    double sum = 0.0, sum_se = 0.0, sum_sq_rel = 0.0;
    int covered = 0;
    for (const auto& rec : records) {
      if (!rec.ok) continue;
      sum += rec.estimate[k];
      sum_se += rec.se[k];
      if (std::abs(m.actual) >= 1e-12) {
        const double rel = (rec.estimate[k] - m.actual) / m.actual;
        sum_sq_rel += rel * rel;
      }
      const double half = 1.96 * rec.se[k];
      if (m.actual >= rec.estimate[k] - half && m.actual <= rec.estimate[k] + half) ++covered;
    }
    const double mean = sum / nc;
    m.bias = mean - m.actual;
    m.ase = sum_se / nc;
    m.coverage = static_cast<double>(covered) / nc;
    if (std::abs(m.actual) >= 1e-12) m.rrmse = std::sqrt(sum_sq_rel / nc);
    if (table.n_completed >= 2) {
      double ss = 0.0;
      for (const auto& rec : records) {
        if (rec.ok) ss += (rec.estimate[k] - mean) * (rec.estimate[k] - mean);
      }
      m.ese = std::sqrt(ss / (nc - 1.0));
    }
  }
  table.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (log) *log = std::move(records);
  return table;
}

RenSemParams benchmark_params(BenchmarkPreset preset) {
  RenSemParams truth;
  truth.beta = (Eigen::VectorXd(7) << -2.0, 1.5, 0.8, 1.2, 0.4, 2.1, 1.3).finished();
  truth.gamma = (Eigen::VectorXd(5) << -1.0, 2.0, 0.9, 1.8, 0.7).finished();
  truth.alpha = Eigen::VectorXd::Zero(2);  // exposure is a fair coin, C-independent
  if (preset == BenchmarkPreset::ring) {
    truth.var_y = truth.var_by = truth.var_m = truth.var_bm = 1.0;
  } else {
    truth.var_y = truth.var_m = 1.0;
    truth.var_by = truth.var_bm = 0.25;  // random-effect SDs halved
  }
  return truth;
}

ExperimentConfig benchmark_config(BenchmarkPreset preset, int n, int replications,
                                  std::uint64_t seed, int workers) {
  ExperimentConfig config;
  config.network.kind =
      preset == BenchmarkPreset::ring ? NetworkKind::ring : NetworkKind::erdos_renyi;
  config.network.n = n;
  config.network.target_degree = 10.0;
  config.replications = replications;
  config.truth = benchmark_params(preset);
  config.confounders = ConfounderSpec{1, 0.0, 1.0};
  config.shift = ExposureShift{0.0, 1.0, 0.0, 1.0};
  config.seed = seed;
  config.workers = workers;
  return config;
}

std::vector<SizedMetrics> reproduce_benchmark(BenchmarkPreset preset, double scale,
                                              std::uint64_t seed, int workers) {
  if (!(scale > 0.0)) throw std::invalid_argument("reproduce_benchmark: scale must be > 0");
  const int reps = std::max(1, static_cast<int>(std::llround(500.0 * scale)));
  std::vector<SizedMetrics> out;
  for (int n : {100, 200, 800}) {
    ExperimentConfig config =
        benchmark_config(preset, n, reps, split_seed(seed, static_cast<std::uint64_t>(n)), workers);
    out.push_back({n, run_experiment(config)});
  }
  return out;
}

}  // namespace rensem
