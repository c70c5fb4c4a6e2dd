#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csq/features.hpp"

namespace csq {

// (1/pi) * arccos(cos similarity), clamped; in [0,1]. Throws on zero-norm
// input, naming the offending user.
double polar_distance(const FeatureVector& a, const FeatureVector& b);

struct Sparsify {
    enum class Kind { None, Knn } kind = Kind::None;
    int k = 10;

    static Sparsify none() { return {Kind::None, 0}; }
    static Sparsify knn(int k) { return {Kind::Knn, k}; }
};

// Undirected weighted graph; weight = similarity = 1 - polar distance.
// Dense symmetric storage; edge(i,j) false means the edge was dropped by
// sparsification (or i == j).
struct SimilarityGraph {
    std::vector<std::string> users;
    std::vector<std::vector<double>> sim;   // n x n, diag 0
    std::vector<std::vector<char>> edge;    // n x n adjacency mask

    int size() const { return static_cast<int>(users.size()); }
    double weight(int i, int j) const { return edge[i][j] ? sim[i][j] : 0.0; }
};

struct GraphBuildResult {
    SimilarityGraph graph;
    std::vector<std::string> excluded_users;  // zero-norm vectors, left out
};

// Complete graph over users with nonzero vectors; knn keeps each node's k
// most similar neighbors, symmetrized by union. Throws if fewer than 2
// valid users remain.
GraphBuildResult build_similarity_graph(const std::vector<FeatureVector>& vectors,
                                        Sparsify sparsify = Sparsify::none());

}  // namespace csq
