#include <benchmark/benchmark.h>

#include "frest/analysis.hpp"
#include "frest/graph.hpp"
#include "frest/loss.hpp"
#include "frest/rng.hpp"
#include "frest/synth.hpp"
#include "frest/transforms.hpp"

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  frest::CounterRng rng(seed);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  }
  return m;
}

Eigen::MatrixXd random_symmetric(Eigen::Index n, std::uint64_t seed) {
  const Eigen::MatrixXd m = random_matrix(n, n, seed);
  return 0.5 * (m + m.transpose());
}

void BM_Eigendecompose(benchmark::State& state) {
  const Eigen::MatrixXd m = random_symmetric(state.range(0), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(frest::eigendecompose(m));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Eigendecompose)->Arg(16)->Arg(64)->Arg(128)->Complexity();

void BM_FftTime(benchmark::State& state) {
  const frest::SpatioTemporalSignal sig{random_matrix(state.range(0), 32, 13)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(frest::fft_time(sig));
  }
}
BENCHMARK(BM_FftTime)->Arg(64)->Arg(96)->Arg(256);

void BM_Jft(benchmark::State& state) {
  const frest::Graph g = frest::random_geometric_graph(32, 7);
  const frest::GraphSpectrum spectrum =
      frest::graph_spectrum(g, frest::LaplacianKind::SymmetricNormalized);
  const frest::SpatioTemporalSignal sig{random_matrix(96, 32, 17)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(frest::jft(sig, spectrum));
  }
}
BENCHMARK(BM_Jft);

void BM_FrestLossWithGradient(benchmark::State& state) {
  const frest::Graph g = frest::random_geometric_graph(32, 7);
  const frest::GraphSpectrum spectrum =
      frest::graph_spectrum(g, frest::LaplacianKind::SymmetricNormalized);
  const Eigen::MatrixXd y = random_matrix(96, 32, 19);
  const Eigen::MatrixXd pred = random_matrix(96, 32, 23);
  const frest::LossConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(frest::frest_loss(y, pred, cfg, spectrum));
  }
}
BENCHMARK(BM_FrestLossWithGradient);

void BM_GaussianFactorize(benchmark::State& state) {
  const Eigen::Index k = state.range(0);
  const Eigen::MatrixXd a = random_matrix(k, k, 29);
  const Eigen::MatrixXd cov =
      a * a.transpose() + static_cast<double>(k) * Eigen::MatrixXd::Identity(k, k);
  const std::vector<int> ordering = frest::raster_ordering(k, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(frest::gaussian_factorize(cov, ordering));
  }
}
BENCHMARK(BM_GaussianFactorize)->Arg(16)->Arg(64);

void BM_DecorrelationTable(benchmark::State& state) {
  const frest::Graph g = frest::random_geometric_graph(8, 31);
  const frest::GraphSpectrum spectrum =
      frest::graph_spectrum(g, frest::LaplacianKind::Combinatorial);
  frest::Ar1Spec spec;
  spec.rho = 0.6;
  spec.t_len = 8;
  spec.n_nodes = 8;
  spec.n_samples = 200;
  spec.seed = 37;
  const frest::SampleEnsemble ens = frest::gen_temporal_ar1(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(frest::decorrelation_table(ens, spectrum));
  }
}
BENCHMARK(BM_DecorrelationTable);

}  // namespace

BENCHMARK_MAIN();
