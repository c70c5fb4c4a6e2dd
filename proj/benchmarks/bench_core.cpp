// Microbenchmarks for the hot paths: distance computation, k-gram
// extraction and the divisive clustering split search.

#include <benchmark/benchmark.h>

#include <random>

#include "csq/clustering.hpp"
#include "csq/features.hpp"
#include "csq/graph.hpp"
#include "csq/synth.hpp"
#include "csq/trajectory.hpp"

using namespace csq;

namespace {

FeatureVector random_vector(std::mt19937_64& rng, int dim, int nnz) {
    FeatureVector v;
    v.user_id = "u";
    for (int i = 0; i < nnz; ++i) v.counts[int(rng() % dim)] = 1 + (long long)(rng() % 20);
    return v;
}

void bm_polar_distance(benchmark::State& state) {
    std::mt19937_64 rng(1);
    int nnz = int(state.range(0));
    auto a = random_vector(rng, 4096, nnz);
    auto b = random_vector(rng, 4096, nnz);
    for (auto _ : state) benchmark::DoNotOptimize(polar_distance(a, b));
}
BENCHMARK(bm_polar_distance)->Arg(32)->Arg(256)->Arg(1024);

void bm_extract_kgrams(benchmark::State& state) {
    auto data = generate(default_archetypes(4), 16, 3);
    auto trails = build_trajectories(data.records);
    const auto& seq = trails.begin()->second;
    for (auto _ : state) benchmark::DoNotOptimize(extract_kgrams(seq, 5));
}
BENCHMARK(bm_extract_kgrams);

void bm_build_similarity_graph(benchmark::State& state) {
    auto data = generate(default_archetypes(int(state.range(0))), 12, 5);
    auto trails = build_trajectories(data.records);
    std::vector<KGramCounts> grams;
    std::vector<std::string> users;
    for (auto& [user, seq] : trails) {
        users.push_back(user);
        grams.push_back(extract_kgrams(seq, 5));
    }
    auto vocab = build_vocabulary(grams, 2);
    std::vector<FeatureVector> vecs;
    for (size_t i = 0; i < users.size(); ++i)
        vecs.push_back(vectorize(users[i], grams[i], vocab));
    for (auto _ : state) benchmark::DoNotOptimize(build_similarity_graph(vecs));
}
BENCHMARK(bm_build_similarity_graph)->Arg(10)->Arg(25);

void bm_divisive_cluster(benchmark::State& state) {
    auto data = generate(default_archetypes(int(state.range(0))), 12, 5);
    auto trails = build_trajectories(data.records);
    std::vector<KGramCounts> grams;
    std::vector<std::string> users;
    for (auto& [user, seq] : trails) {
        users.push_back(user);
        grams.push_back(extract_kgrams(seq, 5));
    }
    auto vocab = build_vocabulary(grams, 2);
    std::vector<FeatureVector> vecs;
    for (size_t i = 0; i < users.size(); ++i)
        vecs.push_back(vectorize(users[i], grams[i], vocab));
    auto built = build_similarity_graph(vecs);
    for (auto _ : state) benchmark::DoNotOptimize(divisive_cluster(built.graph));
}
BENCHMARK(bm_divisive_cluster)->Arg(10)->Arg(25);

}  // namespace

BENCHMARK_MAIN();
