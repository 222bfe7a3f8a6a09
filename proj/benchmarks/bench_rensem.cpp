// Microbenchmarks for the hot paths: spectral setup, likelihood evaluations,
// neighborhood operators and full fits, on Erdos-Renyi networks (target
// degree 10) at the benchmark sizes.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "rensem/experiments.hpp"
#include "rensem/fit.hpp"
#include "rensem/likelihood.hpp"
#include "rensem/model.hpp"
#include "rensem/network.hpp"

using namespace rensem;

namespace {

struct Case {
  std::shared_ptr<const Network> net;
  std::shared_ptr<const SpectralCovariance> spectral;
  Dataset data;
  RenSemParams params;
  std::unique_ptr<LikelihoodContext> ctx;
};

const Case& case_for(int n) {
  static std::map<int, Case> cases;
  auto it = cases.find(n);
  if (it == cases.end()) {
    Case c;
    c.net = std::make_shared<const Network>(
        gen_erdos_renyi(n, 10.0, static_cast<std::uint64_t>(n)));
    c.spectral = std::make_shared<const SpectralCovariance>(*c.net);
    c.params = benchmark_params(BenchmarkPreset::erdos_renyi);
    c.data = simulate_dataset(c.net, c.params, ConfounderSpec{1, 0.0, 1.0},
                              static_cast<std::uint64_t>(n));
    c.ctx = std::make_unique<LikelihoodContext>(c.data, c.spectral);
    it = cases.emplace(n, std::move(c)).first;
  }
  return it->second;
}

void BM_SpectralDecomposition(benchmark::State& state) {
  const Case& c = case_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    SpectralCovariance spec(*c.net);
    benchmark::DoNotOptimize(spec.lambda());
  }
}
BENCHMARK(BM_SpectralDecomposition)->Arg(100)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_LikelihoodContextSetup(benchmark::State& state) {
  const Case& c = case_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    LikelihoodContext ctx(c.data, c.spectral);
    benchmark::DoNotOptimize(ctx.size());
  }
}
BENCHMARK(BM_LikelihoodContextSetup)->Arg(200)->Arg(800)->Unit(benchmark::kMicrosecond);

void BM_Loglik(benchmark::State& state) {
  const Case& c = case_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.ctx->loglik(c.params).total());
  }
}
BENCHMARK(BM_Loglik)->Arg(200)->Arg(800)->Unit(benchmark::kMicrosecond);

void BM_Score(benchmark::State& state) {
  const Case& c = case_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.ctx->score(c.params));
  }
}
BENCHMARK(BM_Score)->Arg(200)->Arg(800)->Unit(benchmark::kMicrosecond);

void BM_Hessian(benchmark::State& state) {
  const Case& c = case_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.ctx->hessian(c.params));
  }
}
BENCHMARK(BM_Hessian)->Arg(200)->Arg(800)->Unit(benchmark::kMicrosecond);

void BM_S2S3Apply(benchmark::State& state) {
  const Case& c = case_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.net->s2_s3_apply(c.data.a));
  }
}
BENCHMARK(BM_S2S3Apply)->Arg(200)->Arg(800)->Unit(benchmark::kMicrosecond);

void BM_NetworkDeltas(benchmark::State& state) {
  const Case& c = case_for(static_cast<int>(state.range(0)));
  const ExposureShift shift{0.0, 1.0, 0.0, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(network_deltas(*c.net, shift));
  }
}
BENCHMARK(BM_NetworkDeltas)->Arg(200)->Arg(800)->Unit(benchmark::kMicrosecond);

void BM_FitGaussianBlock(benchmark::State& state) {
  const Case& c = case_for(static_cast<int>(state.range(0)));
  const Eigen::MatrixXd x = design_y(c.data);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_gaussian_block(c.data.y, x, *c.spectral));
  }
}
BENCHMARK(BM_FitGaussianBlock)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_FitMle(benchmark::State& state) {
  const Case& c = case_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_mle(c.data, c.spectral));
  }
}
BENCHMARK(BM_FitMle)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const Case& c = case_for(static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_dataset(c.net, c.params, ConfounderSpec{1, 0.0, 1.0}, ++seed));
  }
}
BENCHMARK(BM_Simulate)->Arg(800)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
