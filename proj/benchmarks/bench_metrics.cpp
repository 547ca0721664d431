#include <benchmark/benchmark.h>

#include "rider/metrics.hpp"
#include "rider/oracle.hpp"
#include "rider/rng.hpp"

using namespace rider;

namespace {

io::BackboneStructure helix_of_length(int n) {
  Rng rng(17);
  std::string seq;
  for (int i = 0; i < n; ++i)
    seq.push_back("ACGU"[rng.uniform_index(4)]);
  return oracle::helix_fold(oracle::HelixOracleParams{}, seq);
}

io::BackboneStructure noisy_copy(const io::BackboneStructure& s, double sigma) {
  Rng rng(23);
  io::BackboneStructure out = s;
  for (auto& r : out.residues) {
    const Eigen::Vector3d d(rng.normal(0, sigma), rng.normal(0, sigma), rng.normal(0, sigma));
    r = io::ResidueAtoms::make(r.base, r.p + d, r.c4p + d, r.n_glyco + d);
  }
  return out;
}

}  // namespace

static void KabschSuperpose(benchmark::State& state) {
  const auto a = helix_of_length(static_cast<int>(state.range(0)));
  const auto b = noisy_copy(a, 1.0);
  const auto p = a.c4p_points(), q = b.c4p_points();
  for (auto _ : state) {
    auto res = metrics::kabsch_superpose(p, q);
    benchmark::DoNotOptimize(res.rmsd);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(KabschSuperpose)->RangeMultiplier(2)->Range(8, 256)->Complexity();

static void GdtTs(benchmark::State& state) {
  const auto a = helix_of_length(static_cast<int>(state.range(0)));
  const auto b = noisy_copy(a, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::gdt_ts(a, b));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(GdtTs)->RangeMultiplier(2)->Range(16, 128)->Complexity();

static void TmScore(benchmark::State& state) {
  const auto a = helix_of_length(static_cast<int>(state.range(0)));
  const auto b = noisy_copy(a, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::tm_score(a, b));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(TmScore)->RangeMultiplier(2)->Range(16, 128)->Complexity();

static void FullReport(benchmark::State& state) {
  const auto a = helix_of_length(static_cast<int>(state.range(0)));
  const auto b = noisy_copy(a, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::metrics_report(a, b).gdt_ts);
  }
}
BENCHMARK(FullReport)->Arg(20)->Arg(60);

BENCHMARK_MAIN();
