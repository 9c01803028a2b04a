#include <benchmark/benchmark.h>

#include <random>

#include "sest/data.hpp"
#include "sest/extraction.hpp"
#include "sest/model.hpp"
#include "sest/train.hpp"

namespace {

const sest::Corpus& toy() {
  static const sest::Corpus corpus = sest::gen_toy_corpus({.n_examples = 50, .seed = 1});
  return corpus;
}

void BM_ExtractSect(benchmark::State& state) {
  const auto& ex = toy().examples.front();
  const auto& tree = *ex.context.front().ctree;
  sest::ExtractionConfig cfg;
  sest::LabelVocab vocab;
  for (auto _ : state) {
    for (std::size_t i = 0; i < tree.leaf_count(); ++i) benchmark::DoNotOptimize(sest::extract_sect(tree, i, cfg, vocab));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tree.leaf_count()));
}
BENCHMARK(BM_ExtractSect);

void BM_ExtractSedt(benchmark::State& state) {
  const auto& tree = *toy().examples.front().context.front().dtree;
  sest::ExtractionConfig cfg;
  cfg.window = 20;
  sest::LabelVocab labels, words;
  for (auto _ : state) {
    for (std::size_t i = 0; i < tree.size(); ++i) {
      benchmark::DoNotOptimize(sest::extract_sedt(tree, i, cfg, labels, words));
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tree.size()));
}
BENCHMARK(BM_ExtractSedt);

void BM_DecodeSpan(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p1(T), p2(T);
  for (std::size_t i = 0; i < T; ++i) {
    p1[i] = u(rng);
    p2[i] = u(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(sest::decode_span(p1, p2, 15));
}
BENCHMARK(BM_DecodeSpan)->Arg(50)->Arg(400);

sest::SestModel make_model(sest::SyntaxMode mode) {
  sest::ModelConfig cfg;
  cfg.syn_mode = mode;
  return sest::SestModel::build(cfg, toy());
}

void BM_Forward(benchmark::State& state) {
  const auto model = make_model(static_cast<sest::SyntaxMode>(state.range(0)));
  const auto prepared = model.prepare(toy().examples.front());
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(prepared));
  state.SetLabel(sest::to_string(model.config().syn_mode));
}
BENCHMARK(BM_Forward)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  auto model = make_model(static_cast<sest::SyntaxMode>(state.range(0)));
  const auto prepared = model.prepare(toy().examples.front());
  for (auto _ : state) {
    model.params().zero_grad();
    const auto loss = sest::span_loss(model.forward(prepared), prepared.answer.begin, prepared.answer.end);
    sest::ad::backward(loss.loss);
  }
  state.SetLabel(sest::to_string(model.config().syn_mode));
}
BENCHMARK(BM_ForwardBackward)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
