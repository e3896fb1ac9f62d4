#include <benchmark/benchmark.h>

#include <random>

#include "slterr/align.h"
#include "slterr/crf.h"
#include "slterr/features.h"
#include "slterr/labeling.h"
#include "slterr/synth.h"

namespace {

slterr::Tokens RandomTokens(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> sym(0, 19);
  slterr::Tokens t(n);
  for (auto& x : t) x = "w" + std::to_string(sym(rng));
  return t;
}

void BM_EditAlign(benchmark::State& state) {
  std::mt19937_64 rng(1);
  auto n = static_cast<std::size_t>(state.range(0));
  auto a = RandomTokens(rng, n), b = RandomTokens(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(slterr::EditAlign(a, b).cost);
}
BENCHMARK(BM_EditAlign)->Arg(10)->Arg(30)->Arg(100);

void BM_TerAlign(benchmark::State& state) {
  std::mt19937_64 rng(2);
  auto n = static_cast<std::size_t>(state.range(0));
  auto a = RandomTokens(rng, n), b = RandomTokens(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(slterr::TerAlign(a, b).cost);
}
BENCHMARK(BM_TerAlign)->Arg(10)->Arg(30);

// A small trained model plus compiled lattices for the decoding benchmarks.
struct Fixture {
  slterr::CrfModel model;
  std::vector<slterr::Lattice> lattices;
};

const Fixture& Trained() {
  static const Fixture fixture = [] {
    slterr::SynthConfig sc;
    sc.utterances = 100;
    auto synth = slterr::Synthesize(sc);
    std::vector<slterr::LabelSeq> labels;
    for (const auto& q : synth.corpus) labels.push_back(slterr::ExtractLabels(q).method1);
    auto config = slterr::FeatureConfig::Default();
    auto models = slterr::TrainFeatureModels(synth.corpus, config);
    slterr::InstanceInputs inputs;
    inputs.labels = &labels;
    inputs.confidence = &synth.confidence;
    auto instances = slterr::BuildInstances(synth.corpus, inputs, config, models,
                                            slterr::FeatureMode::kJoint);
    auto templates = slterr::UsableTemplates(config, instances.front().attrs.names);
    slterr::TrainConfig tc;
    tc.max_epochs = 30;
    Fixture f{slterr::TrainCrf(instances, templates,
                               {"G", "B_ASR", "B_MT"}, tc),
              {}};
    for (const auto& inst : instances) f.lattices.push_back(f.model.Compile(inst));
    return f;
  }();
  return fixture;
}

void BM_CrfViterbi(benchmark::State& state) {
  const auto& f = Trained();
  for (auto _ : state)
    for (const auto& l : f.lattices) benchmark::DoNotOptimize(slterr::Viterbi(f.model, l));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.lattices.size()));
}
BENCHMARK(BM_CrfViterbi);

void BM_CrfForwardBackward(benchmark::State& state) {
  const auto& f = Trained();
  std::vector<double> grad(f.model.num_features());
  for (auto _ : state)
    for (const auto& l : f.lattices)
      benchmark::DoNotOptimize(slterr::LogLikelihoodAndGradient(f.model, l, &grad));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.lattices.size()));
}
BENCHMARK(BM_CrfForwardBackward);

}  // namespace

BENCHMARK_MAIN();
