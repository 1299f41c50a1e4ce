#include <benchmark/benchmark.h>

#include <cmath>
#include <map>
#include <random>
#include <string>

#include "scenerag/embedding.hpp"
#include "scenerag/geo.hpp"
#include "scenerag/text.hpp"
#include "scenerag/vector_store.hpp"

namespace {

using namespace scenerag;

embedding::EmbeddingVector random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<double> v(dim);
  double n = 0;
  for (auto& x : v) {
    x = g(rng);
    n += x * x;
  }
  for (auto& x : v) x /= std::sqrt(n);
  return embedding::EmbeddingVector(std::move(v), embedding::Norm::kUnitL2);
}

const store::Collection& shared_collection(std::size_t n) {
  static std::map<std::size_t, store::Collection> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::mt19937_64 rng(7);
    store::Collection c("bench", 384);
    std::vector<store::StoredDocument> docs;
    for (std::size_t i = 0; i < n; ++i) docs.push_back({"d" + std::to_string(i), "", {}, random_unit(rng, 384)});
    c.add_documents(docs);
    it = cache.emplace(n, std::move(c)).first;
  }
  return it->second;
}

std::string sample_text(std::size_t words) {
  static const char* pool[] = {"the", "bus", "blocks", "line", "of", "sight", "between", "transmitter", "and",
                               "receiver", "beam", "17", "array", "0"};
  std::string s;
  for (std::size_t i = 0; i < words; ++i) s += std::string(pool[i % 14]) + " ";
  return s;
}

void BM_SearchExact(benchmark::State& state) {
  const auto& c = shared_collection(static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(8);
  const auto q = random_unit(rng, 384);
  for (auto _ : state) benchmark::DoNotOptimize(c.search_exact(q, 10));
}
BENCHMARK(BM_SearchExact)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SearchAnn(benchmark::State& state) {
  const auto& c = shared_collection(static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(9);
  const auto q = random_unit(rng, 384);
  c.search_ann(q, 10);
  for (auto _ : state) benchmark::DoNotOptimize(c.search_ann(q, 10));
}
BENCHMARK(BM_SearchAnn)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_EmbedLocal(benchmark::State& state) {
  const auto text = sample_text(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(embedding::embed_local(text));
}
BENCHMARK(BM_EmbedLocal)->Arg(16)->Arg(256);

void BM_Tokenize(benchmark::State& state) {
  const auto text = sample_text(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(text::tokenize(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize)->Arg(256)->Arg(4096);

void BM_Haversine(benchmark::State& state) {
  const geo::GeoPoint a{33.42, -111.93, std::nullopt};
  const geo::GeoPoint b{33.43, -111.92, std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(geo::haversine_distance(a, b));
}
BENCHMARK(BM_Haversine);

}  // namespace

BENCHMARK_MAIN();
