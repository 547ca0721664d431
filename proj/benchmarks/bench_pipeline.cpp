#include <benchmark/benchmark.h>

#include "rider/diffusion.hpp"
#include "rider/featurize.hpp"
#include "rider/oracle.hpp"
#include "rider/policy.hpp"
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

}  // namespace

static void BuildGraph(benchmark::State& state) {
  const auto s = helix_of_length(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto g = feat::build_graph(s, 32);
    benchmark::DoNotOptimize(g.n_nodes);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BuildGraph)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void EncodeStructure(benchmark::State& state) {
  const auto s = helix_of_length(static_cast<int>(state.range(0)));
  const auto g = feat::build_graph(s, 32);
  const auto params = feat::make_encoder_params(feat::EncoderConfig{});
  for (auto _ : state) {
    auto h = feat::encode_structure(g, params);
    benchmark::DoNotOptimize(h.scalar.sum());
  }
}
BENCHMARK(EncodeStructure)->Arg(20)->Arg(60);

static void SampleSequence(benchmark::State& state) {
  const auto s = helix_of_length(20);
  const auto g = feat::build_graph(s, 32);
  const auto h = feat::encode_structure(g, feat::make_encoder_params(feat::EncoderConfig{}));
  policy::FeatureSpec spec;
  const auto params = policy::PolicyParams::seeded(spec, 42);
  const diffusion::NoiseSchedule sched;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Rng rng(seed++);
    auto [seq, traj] = diffusion::sample_sequence(params, h.scalar,
                                                  static_cast<int>(state.range(0)), 0.3, sched,
                                                  rng);
    benchmark::DoNotOptimize(seq.letters);
  }
}
BENCHMARK(SampleSequence)->Arg(30)->Arg(50);

static void HelixFold(benchmark::State& state) {
  Rng rng(3);
  std::string seq;
  for (int i = 0; i < 60; ++i) seq.push_back("ACGU"[rng.uniform_index(4)]);
  const oracle::HelixOracleParams params;
  for (auto _ : state) {
    auto s = oracle::helix_fold(params, seq);
    benchmark::DoNotOptimize(s.residues.back().centroid);
  }
}
BENCHMARK(HelixFold);

BENCHMARK_MAIN();
