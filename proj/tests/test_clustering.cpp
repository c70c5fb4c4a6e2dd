#include <algorithm>
#include <random>

#include "csq/clustering.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace csq;

namespace {

FeatureVector fv(const std::string& user, std::vector<long long> dense) {
    FeatureVector v;
    v.user_id = user;
    for (size_t i = 0; i < dense.size(); ++i)
        if (dense[i] != 0) v.counts[(int)i] = dense[i];
    return v;
}

SimilarityGraph graph_from(const std::vector<std::vector<double>>& w) {
    SimilarityGraph g;
    int n = (int)w.size();
    for (int i = 0; i < n; ++i) g.users.push_back("u" + std::to_string(i));
    g.sim = w;
    g.edge.assign(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g.edge[i][j] = (i != j && w[i][j] > 0);
    return g;
}

// Two k-cliques with strong internal weights, joined by one weak edge.
std::vector<std::vector<double>> two_cliques(int k, double inside, double bridge) {
    int n = 2 * k;
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && (i < k) == (j < k)) w[i][j] = inside;
    w[0][k] = w[k][0] = bridge;
    return w;
}

// Four well separated blobs in a 8-dim count space.
std::vector<FeatureVector> four_blobs(int per_blob, std::mt19937_64& rng,
                                      std::vector<int>* truth = nullptr) {
    std::vector<FeatureVector> vs;
    long long centers[4][8] = {{400, 0, 0, 0, 7, 0, 0, 0},
                               {0, 400, 0, 0, 0, 7, 0, 0},
                               {0, 0, 400, 0, 0, 0, 7, 0},
                               {0, 0, 0, 400, 0, 0, 0, 7}};
    for (int b = 0; b < 4; ++b)
        for (int i = 0; i < per_blob; ++i) {
            std::vector<long long> x(8);
            for (int d = 0; d < 8; ++d) x[d] = centers[b][d] + (long long)(rng() % 5);
            vs.push_back(fv("b" + std::to_string(b) + "_" + std::to_string(i), x));
            if (truth) truth->push_back(b);
        }
    return vs;
}

}  // namespace

TEST_CASE("bipartition_modularity agrees with the definition") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 3 + int(rng() % 8);
        auto w = oracle::random_graph(n, 0.7, rng);
        std::vector<char> side(n);
        for (auto& s : side) s = char(rng() % 2);
        CHECK(bipartition_modularity(w, side) ==
              doctest::Approx(oracle::modularity(w, side)).epsilon(1e-12));
    }
}

TEST_CASE("best_bipartition matches brute force on small random graphs") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 2 + int(rng() % 11);  // up to 12 nodes
        auto w = oracle::random_graph(n, 0.3 + 0.5 * ((trial % 3) / 2.0), rng);
        auto got = best_bipartition(w);
        auto want = oracle::brute_force_best_split(w);
        if (got.accepted) {
            CHECK(got.modularity == doctest::Approx(want.modularity).epsilon(1e-9));
        } else {
            // declining is only allowed when the true optimum is not
            // meaningfully positive
            CHECK(want.modularity <= 1e-9);
        }
    }
}

TEST_CASE("divisive_cluster splits two cliques apart") {
    auto g = graph_from(two_cliques(10, 0.99, 0.01));
    auto a = divisive_cluster(g);
    REQUIRE(a.cluster_count() == 2);
    for (int i = 0; i < 20; ++i) CHECK(a.labels[i] == a.labels[i < 10 ? 0 : 10]);
    CHECK(a.labels[0] != a.labels[10]);
    CHECK(!a.tree.empty());
}

TEST_CASE("uniform graph stays one cluster") {
    int n = 8;
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 1.0));
    for (int i = 0; i < n; ++i) w[i][i] = 0;
    auto a = divisive_cluster(graph_from(w));
    CHECK(a.cluster_count() == 1);
}

TEST_CASE("single node is a single cluster") {
    SimilarityGraph g;
    g.users = {"solo"};
    g.sim = {{0.0}};
    g.edge = {{0}};
    auto a = divisive_cluster(g);
    CHECK(a.cluster_count() == 1);
    CHECK(a.labels == std::vector<int>{0});
}

TEST_CASE("min_size forbids small splits") {
    auto g = graph_from(two_cliques(3, 0.99, 0.01));
    CHECK(divisive_cluster(g, 1).cluster_count() == 2);
    CHECK(divisive_cluster(g, 4).cluster_count() == 1);
}

TEST_CASE("disconnected components cluster independently") {
    // two components, one of which itself splits
    auto w = two_cliques(4, 0.9, 0.01);
    int n = (int)w.size();
    std::vector<std::vector<double>> big(n + 3, std::vector<double>(n + 3, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) big[i][j] = w[i][j];
    for (int i = n; i < n + 3; ++i)
        for (int j = n; j < n + 3; ++j)
            if (i != j) big[i][j] = 0.8;
    auto a = divisive_cluster(graph_from(big));
    CHECK(a.cluster_count() == 3);
}

TEST_CASE("labels always form a dense partition") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + int(rng() % 14);
        auto w = oracle::random_graph(n, 0.5, rng);
        auto a = divisive_cluster(graph_from(w));
        REQUIRE((int)a.labels.size() == n);
        int k = a.cluster_count();
        std::vector<int> seen(k, 0);
        for (int l : a.labels) {
            REQUIRE(l >= 0);
            REQUIRE(l < k);
            seen[l]++;
        }
        for (int c = 0; c < k; ++c) CHECK(seen[c] > 0);
        auto sizes = a.cluster_sizes();
        long long total = 0;
        for (int s : sizes) total += s;
        CHECK(total == n);
    }
}

TEST_CASE("chi_square_feature worked example") {
    // cluster holds all 10 of feature 0's mass and none of feature 1's;
    // complement holds the reverse: contingency [[10,0],[0,10]].
    std::vector<FeatureVector> vs = {fv("a", {10, 0}), fv("b", {0, 10})};
    std::vector<int> labels = {0, 1};
    CHECK(chi_square_feature(vs, labels, 0, 0) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(chi_square_feature(vs, labels, 0, 1) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("chi_square_feature degenerate cases") {
    // identical rates inside and outside
    std::vector<FeatureVector> vs = {fv("a", {5, 5}), fv("b", {5, 5})};
    CHECK(chi_square_feature(vs, {0, 1}, 0, 0) == 0.0);
    // whole population in one cluster: complement marginal is zero
    CHECK(chi_square_feature(vs, {0, 0}, 0, 0) == 0.0);
    // feature with zero mass anywhere
    std::vector<FeatureVector> vz = {fv("a", {5, 0}), fv("b", {3, 0})};
    CHECK(chi_square_feature(vz, {0, 1}, 0, 1) == 0.0);
}

TEST_CASE("chi_square_feature invariant under relabeling the complement") {
    std::mt19937_64 rng(55);
    std::vector<FeatureVector> vs;
    std::vector<int> labels3, labels2;
    for (int i = 0; i < 12; ++i) {
        std::vector<long long> x(4);
        for (auto& v : x) v = (long long)(rng() % 6);
        if (std::all_of(x.begin(), x.end(), [](auto v) { return v == 0; })) x[0] = 1;
        vs.push_back(fv("u" + std::to_string(i), x));
        int l = i % 3;
        labels3.push_back(l);
        labels2.push_back(l == 0 ? 0 : 1);  // merge clusters 1 and 2
    }
    for (int f = 0; f < 4; ++f)
        CHECK(chi_square_feature(vs, labels3, 0, f) ==
              doctest::Approx(chi_square_feature(vs, labels2, 0, f)).epsilon(1e-12));
}

TEST_CASE("characterize_cluster ranks the planted gram first") {
    Vocabulary vocab;
    vocab.grams = {"rating T[2] consensus-chart_view T[2] view", "view T[2] view",
                   "zz T[2] zz"};
    for (int i = 0; i < 3; ++i) vocab.index[vocab.grams[i]] = i;
    std::vector<FeatureVector> vs;
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
        bool planted = i < 3;
        vs.push_back(fv("u" + std::to_string(i),
                        planted ? std::vector<long long>{20, 5, 1}
                                : std::vector<long long>{0, 5, 1}));
        labels.push_back(planted ? 0 : 1);
    }
    auto p = characterize_cluster(vs, labels, vocab, 0, 2);
    CHECK(p.cluster_id == 0);
    CHECK(p.size == 3);
    REQUIRE(p.top_features.size() == 2);
    CHECK(p.top_features[0].first == "rating T[2] consensus-chart_view T[2] view");
    CHECK(p.top_features[0].second >= p.top_features[1].second);

    auto one = characterize_cluster(vs, labels, vocab, 0, 1);
    CHECK(one.top_features.size() == 1);
}

TEST_CASE("make_super_cluster picks the three largest, ties by id") {
    ClusterAssignment a;
    // sizes: cluster 0 -> 2, 1 -> 4, 2 -> 2, 3 -> 3, 4 -> 1
    std::vector<int> labels = {0, 0, 1, 1, 1, 1, 2, 2, 3, 3, 3, 4};
    for (size_t i = 0; i < labels.size(); ++i) a.users.push_back("u" + std::to_string(i));
    a.labels = labels;
    auto s = make_super_cluster(a, 3);
    CHECK(!s.c4_empty_warning);
    // largest = 1(4), 3(3), then tie between 0 and 2 at size 2 -> 0 wins
    CHECK(s.base_of == std::vector<int>{1, 3, 0});
    std::map<int, int> super_of_base;
    for (size_t i = 0; i < labels.size(); ++i) super_of_base[labels[i]] = s.labels[i];
    CHECK(super_of_base[1] == 1);
    CHECK(super_of_base[3] == 2);
    CHECK(super_of_base[0] == 3);
    CHECK(super_of_base[2] == 4);
    CHECK(super_of_base[4] == 4);
}

TEST_CASE("make_super_cluster with exactly 3 clusters flags empty C4") {
    ClusterAssignment a;
    a.users = {"a", "b", "c"};
    a.labels = {0, 1, 2};
    auto s = make_super_cluster(a, 3);
    CHECK(s.c4_empty_warning);
    CHECK(std::count(s.labels.begin(), s.labels.end(), 4) == 0);
}

TEST_CASE("kmeans_baseline recovers 4 blobs and elbow agrees") {
    std::mt19937_64 rng(1);
    std::vector<int> truth;
    auto vs = four_blobs(12, rng, &truth);
    auto a = kmeans_baseline(vs, 8, 4, 7);
    CHECK(adjusted_rand_index(a.labels, truth) == doctest::Approx(1.0));

    auto elbow = elbow_select(vs, 8, 10, 7);
    CHECK(elbow.k == 4);
    CHECK(!elbow.flat_curve_warning);
    // inertia is nonincreasing in k
    for (size_t i = 1; i < elbow.inertia.size(); ++i)
        CHECK(elbow.inertia[i] <= elbow.inertia[i - 1] + 1e-9);
}

TEST_CASE("kmeans degenerate cases") {
    std::mt19937_64 rng(2);
    auto vs = four_blobs(3, rng);
    auto one = kmeans_baseline(vs, 8, 1, 0);
    CHECK(one.cluster_count() == 1);

    std::vector<FeatureVector> same = {fv("a", {5, 5}), fv("b", {5, 5}), fv("c", {5, 5})};
    auto k2 = kmeans_baseline(same, 2, 2, 0);
    CHECK(kmeans_inertia(same, 2, k2) == doctest::Approx(0.0));

    CHECK_THROWS(kmeans_baseline(same, 2, 5, 0));
}

TEST_CASE("flat inertia curve trips the guard; structureless spread picks a low k") {
    // a degenerate single blob: identical vectors, inertia zero everywhere
    std::vector<FeatureVector> same;
    for (int i = 0; i < 20; ++i) same.push_back(fv("u" + std::to_string(i), {50, 7}));
    auto flat = elbow_select(same, 2, 8, 7);
    CHECK(flat.flat_curve_warning);
    CHECK(flat.k == 1);

    // an even 1-d spread has no planted structure; the geometric elbow
    // settles on a small k rather than chasing the curve's tail
    std::vector<FeatureVector> line;
    for (int i = 0; i < 40; ++i) line.push_back(fv("l" + std::to_string(i), {100 + i}));
    auto spread = elbow_select(line, 1, 8, 7);
    CHECK(spread.k <= 3);
}

TEST_CASE("kmeans determinism under a fixed seed") {
    std::mt19937_64 rng(4);
    auto vs = four_blobs(8, rng);
    auto a = kmeans_baseline(vs, 8, 4, 99);
    auto b = kmeans_baseline(vs, 8, 4, 99);
    CHECK(a.labels == b.labels);
}

TEST_CASE("adjusted_rand_index reference points") {
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(adjusted_rand_index({0, 1, 2, 3}, {0, 0, 0, 0}) == doctest::Approx(0.0));
    CHECK(adjusted_rand_index({0, 0, 1, 1, 2, 2}, {0, 0, 1, 1, 2, 2}) ==
          doctest::Approx(1.0));
    // independent-looking partitions land near zero
    CHECK(std::fabs(adjusted_rand_index({0, 1, 0, 1, 0, 1}, {0, 0, 0, 1, 1, 1})) < 0.4);
}
