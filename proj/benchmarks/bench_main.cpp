#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "test_util.hpp"
#include "tse/embeddings.hpp"
#include "tse/eval.hpp"
#include "tse/hdp.hpp"
#include "tse/random.hpp"
#include "tse/synthetic.hpp"

namespace {

tse::EmbeddingModel bench_model(tse::Variant v, std::size_t dim) {
  const std::size_t V = 1000, K = 8;
  std::vector<std::pair<std::string, std::uint64_t>> words;
  for (std::size_t i = 0; i < V; ++i) words.emplace_back("w" + std::to_string(i), V - i);
  std::vector<std::pair<tse::WordId, tse::TopicId>> entries;
  if (v != tse::Variant::kSge) {
    for (std::size_t w = 0; w < V; ++w) {
      for (std::size_t k = 0; k < K; ++k) entries.emplace_back(static_cast<tse::WordId>(w), static_cast<tse::TopicId>(k));
    }
  }
  tse::EmbeddingModel m(v, dim, K, tse::Vocabulary::from_entries(words), entries);
  tse::Rng rng(1);
  for (auto* t : {&m.topic_table(), &m.generic_table(), &m.output_table()}) {
    for (auto& x : *t) x = (tse::uniform01(rng) - 0.5) / static_cast<double>(dim);
  }
  return m;
}

void BM_SgnsStep(benchmark::State& state) {
  const auto variant = static_cast<tse::Variant>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  auto m = bench_model(variant, dim);
  const std::vector<double> p{0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05};
  const tse::TopicInfo info =
      variant == tse::Variant::kStle ? tse::TopicInfo(std::span<const double>(p)) : tse::TopicInfo(tse::TopicId{2});
  const auto target = tse::make_target(m, 5, variant == tse::Variant::kSge ? tse::TopicInfo(std::monostate{}) : info, 0);
  const std::vector<tse::WordId> negs{11, 12, 13, 14, 15};
  tse::SgnsWorkspace ws;
  for (auto _ : state) benchmark::DoNotOptimize(tse::sgns_step(m, target, 7, negs, 1e-6, ws));
  state.SetLabel(std::string(tse::variant_name(variant)));
}
BENCHMARK(BM_SgnsStep)->ArgsProduct({{0, 1, 2, 3}, {100, 300}});

const tse::Corpus& lda_corpus() {
  static const tse::Corpus corpus = tse::testing::make_corpus(tse::make_lda_corpus({}).lines);
  return corpus;
}

void BM_HdpSweep(benchmark::State& state) {
  const auto& corpus = lda_corpus();
  tse::HdpSampler sampler(corpus, tse::HdpHyper{}, 1);
  for (int i = 0; i < 20; ++i) sampler.sweep();
  for (auto _ : state) sampler.sweep();
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * corpus.token_count()));
}
BENCHMARK(BM_HdpSweep)->Unit(benchmark::kMillisecond);

void BM_FoldIn(benchmark::State& state) {
  const auto& corpus = lda_corpus();
  tse::HdpTrainOptions options;
  options.iterations = 100;
  static const auto model = tse::train_hdp(corpus, tse::HdpHyper{}, options).model;
  const auto& tokens = corpus.documents[0].tokens;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tse::fold_in(model, tokens, ++seed));
}
BENCHMARK(BM_FoldIn)->Unit(benchmark::kMicrosecond);

void BM_Gap(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> ranking;
  std::vector<std::pair<std::string, int>> gold;
  for (std::size_t i = 0; i < n; ++i) {
    ranking.push_back("s" + std::to_string(i));
    if (i % 3 == 0) gold.emplace_back("s" + std::to_string(n - 1 - i), 1 + static_cast<int>(i % 4));
  }
  for (auto _ : state) benchmark::DoNotOptimize(tse::gap(ranking, gold));
}
BENCHMARK(BM_Gap)->Arg(20)->Arg(200);

void BM_MannWhitney(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  tse::Rng rng(3);
  std::vector<double> a(n), b(n);
  for (auto& x : a) x = tse::uniform01(rng);
  for (auto& x : b) x = tse::uniform01(rng);
  for (auto _ : state) benchmark::DoNotOptimize(tse::mann_whitney(a, b));
}
// 8 vs 8 enumerates exactly; 300 vs 300 takes the normal approximation.
BENCHMARK(BM_MannWhitney)->Arg(8)->Arg(300);

}  // namespace
