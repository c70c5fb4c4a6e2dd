#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csq/graph.hpp"

namespace csq {

struct ClusterSplit {
    int parent = -1;
    int left = -1;
    int right = -1;
    double modularity = 0;  // modularity of the accepted two-way split
};

struct ClusterAssignment {
    std::vector<std::string> users;
    std::vector<int> labels;           // cluster id per user, 0-based, dense
    std::vector<ClusterSplit> tree;    // split history (divisive only)
    std::string method;                // "divisive" | "kmeans"

    int cluster_count() const;
    std::vector<int> cluster_sizes() const;
};

struct ClusterProfile {
    int cluster_id = -1;
    int size = 0;
    std::vector<std::pair<KGram, double>> top_features;  // chi^2 descending
};

struct SuperClusterAssignment {
    std::vector<std::string> users;
    std::vector<int> labels;       // 1..4 for C1..C4
    std::vector<int> base_of;      // super id (1..3) -> base cluster id
    bool c4_empty_warning = false;
};

// Modularity of a two-way node partition of the weighted graph given by w
// (symmetric, zero diagonal); side[i] in {0,1}.
double bipartition_modularity(const std::vector<std::vector<double>>& w,
                              const std::vector<char>& side);

struct Bipartition {
    std::vector<char> side;
    double modularity = 0;
    bool accepted = false;  // false: no positive-modularity split exists/found
};

// Best two-way split of the weighted (sub)graph: exact search for small n,
// spectral ordering + sweep cut + greedy node-move refinement otherwise.
Bipartition best_bipartition(const std::vector<std::vector<double>>& w);

// Recursive divisive clustering. Connected components are clustered
// independently; a subgraph becomes a leaf when no split has positive
// modularity with both sides >= min_size, or max_depth is reached.
ClusterAssignment divisive_cluster(const SimilarityGraph& graph, int min_size = 1,
                                   int max_depth = 20);

// 2x2 contingency chi^2 (no continuity correction): {cluster, complement} x
// {mass of this k-gram, mass of all other k-grams}. Zero marginals give 0.
double chi_square_feature(const std::vector<FeatureVector>& vectors,
                          const std::vector<int>& labels, int cluster_id, int feature);

ClusterProfile characterize_cluster(const std::vector<FeatureVector>& vectors,
                                    const std::vector<int>& labels, const Vocabulary& vocab,
                                    int cluster_id, int top_n);

// C1..C3 = the top_k largest base clusters (ties by smaller cluster id),
// C4 = everything else.
SuperClusterAssignment make_super_cluster(const ClusterAssignment& assignment, int top_k = 3);

// Lloyd k-means with k-means++ seeding on raw count vectors (Euclidean).
ClusterAssignment kmeans_baseline(const std::vector<FeatureVector>& vectors, int dim, int k,
                                  std::uint64_t seed, bool normalize = false);

double kmeans_inertia(const std::vector<FeatureVector>& vectors, int dim,
                      const ClusterAssignment& assignment);

struct ElbowResult {
    int k = 1;
    bool flat_curve_warning = false;
    std::vector<double> inertia;  // inertia[i] for k = i+1
};

// Kneedle-style geometric elbow on the inertia curve for k = 1..k_max.
ElbowResult elbow_select(const std::vector<FeatureVector>& vectors, int dim, int k_max,
                         std::uint64_t seed);

// Chance-corrected partition agreement in [-1, 1]; 1 = identical partitions.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace csq
