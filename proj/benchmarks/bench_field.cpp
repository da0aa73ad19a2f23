#include <benchmark/benchmark.h>

#include "driftx/field.hpp"
#include "driftx/kernel.hpp"
#include "driftx/nystrom.hpp"
#include "driftx/parallel.hpp"
#include "driftx/random.hpp"

namespace {

using driftx::FeatureSet;
using driftx::Index;
using driftx::Matrix;

constexpr double kTau = 0.5;
constexpr Index kBatch = 256;
constexpr Index kRank = 200;

Matrix gaussian(Index n, Index d, std::uint64_t seed) {
  driftx::Rng rng(driftx::Seed{seed});
  return rng.normal_matrix(n, d);
}

driftx::ShardedSummaryBank make_bank(const FeatureSet& positives, Index shards) {
  std::vector<driftx::SummaryShard> out;
  const Index per_shard = kRank / shards;
  for (Index s = 0; s < shards; ++s) {
    std::vector<Index> members;
    for (Index i = s; i < positives.size(); i += shards) members.push_back(i);
    const FeatureSet part = positives.subset(members);
    driftx::NystromBasis basis(part.points().topRows(per_shard), kTau);
    auto summary = driftx::build_summary(basis, part, static_cast<int>(s));
    out.push_back({std::move(basis), std::move(summary)});
  }
  return driftx::ShardedSummaryBank(std::move(out));
}

void BM_KernelMatrix(benchmark::State& state) {
  driftx::ScopedThreadLimit single(1);
  const Matrix a = gaussian(kBatch, 2, 1);
  const Matrix b = gaussian(state.range(0), 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(driftx::kernel_matrix(a, b, kTau));
  state.SetItemsProcessed(state.iterations() * kBatch * state.range(0));
}
BENCHMARK(BM_KernelMatrix)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);

void BM_ExactAttraction(benchmark::State& state) {
  driftx::ScopedThreadLimit single(1);
  const FeatureSet queries(gaussian(kBatch, 2, 1));
  const FeatureSet positives(gaussian(state.range(0), 2, 2));
  for (auto _ : state) benchmark::DoNotOptimize(driftx::exact_attractive_mean(queries, positives, kTau, 1e-12));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExactAttraction)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_ProjectedAttraction(benchmark::State& state) {
  driftx::ScopedThreadLimit single(1);
  const FeatureSet queries(gaussian(kBatch, 2, 1));
  const FeatureSet positives(gaussian(state.range(0), 2, 2));
  const auto bank = make_bank(positives, state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(driftx::projected_attractive_mean(queries, bank, driftx::Conditioning::Unconditional));
  }
}
BENCHMARK(BM_ProjectedAttraction)
    ->ArgsProduct({{1000, 10000, 100000}, {1, 10}})
    ->ArgNames({"npos", "shards"})
    ->Unit(benchmark::kMillisecond);

void BM_DriftField(benchmark::State& state) {
  driftx::ScopedThreadLimit single(1);
  const FeatureSet queries(gaussian(kBatch, 2, 1));
  const FeatureSet positives(gaussian(10000, 2, 2));
  const std::vector<driftx::ShardedSummaryBank> banks{make_bank(positives, 1)};
  driftx::DriftFieldConfig config;
  config.attraction = state.range(0) == 0 ? driftx::Estimator::Exact : driftx::Estimator::Projected;
  driftx::FieldInputs inputs;
  inputs.positives = &positives;
  inputs.banks = banks;
  inputs.negatives = &queries;
  for (auto _ : state) benchmark::DoNotOptimize(driftx::drift_field(queries, inputs, config));
}
BENCHMARK(BM_DriftField)->Arg(0)->Arg(1)->ArgName("projected")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
