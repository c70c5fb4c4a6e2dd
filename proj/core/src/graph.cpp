#include "csq/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace csq {

double polar_distance(const FeatureVector& a, const FeatureVector& b) {
    double na = 0, nb = 0, dot = 0;
    for (auto& [i, c] : a.counts) na += static_cast<double>(c) * c;
    for (auto& [i, c] : b.counts) nb += static_cast<double>(c) * c;
    if (na == 0) throw std::invalid_argument("polar_distance: zero-norm vector for user " + a.user_id);
    if (nb == 0) throw std::invalid_argument("polar_distance: zero-norm vector for user " + b.user_id);

    // merge join over the sparse maps
    auto ia = a.counts.begin();
    auto ib = b.counts.begin();
    while (ia != a.counts.end() && ib != b.counts.end()) {
        if (ia->first < ib->first)
            ++ia;
        else if (ib->first < ia->first)
            ++ib;
        else {
            dot += static_cast<double>(ia->second) * static_cast<double>(ib->second);
            ++ia;
            ++ib;
        }
    }
    // sqrt of the product, not the product of sqrts: with integer counts
    // na*nb is exact, so proportional vectors give cosine exactly 1.
    double cosine = dot / std::sqrt(na * nb);
    cosine = std::clamp(cosine, -1.0, 1.0);
    return std::acos(cosine) / std::numbers::pi;
}

GraphBuildResult build_similarity_graph(const std::vector<FeatureVector>& vectors,
                                        Sparsify sparsify) {
    GraphBuildResult result;
    std::vector<const FeatureVector*> valid;
    for (const auto& v : vectors) {
        if (v.zero())
            result.excluded_users.push_back(v.user_id);
        else
            valid.push_back(&v);
    }
    int n = static_cast<int>(valid.size());
    if (n < 2) throw std::invalid_argument("build_similarity_graph: need >= 2 users with nonzero vectors");

    auto& g = result.graph;
    g.users.reserve(n);
    for (auto* v : valid) g.users.push_back(v->user_id);
    g.sim.assign(n, std::vector<double>(n, 0.0));
    g.edge.assign(n, std::vector<char>(n, 0));

    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double s = 1.0 - polar_distance(*valid[i], *valid[j]);
            g.sim[i][j] = g.sim[j][i] = s;
        }

    if (sparsify.kind == Sparsify::Kind::None) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g.edge[i][j] = (i != j);
        return result;
    }

    // knn: keep each node's k strongest edges, union-symmetrized.
    // Ties broken by neighbor index for determinism.
    int k = std::max(1, sparsify.k);
    for (int i = 0; i < n; ++i) {
        std::vector<int> order;
        order.reserve(n - 1);
        for (int j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
            return g.sim[i][x] > g.sim[i][y];
        });
        for (int r = 0; r < std::min<int>(k, static_cast<int>(order.size())); ++r) {
            int j = order[r];
            g.edge[i][j] = g.edge[j][i] = 1;
        }
    }
    return result;
}

}  // namespace csq
