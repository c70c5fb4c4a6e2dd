#include "csq/clustering.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace csq {

namespace {

// Portable uniform double in [0,1) from the raw engine output.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

int ClusterAssignment::cluster_count() const {
    int m = -1;
    for (int l : labels) m = std::max(m, l);
    return m + 1;
}

std::vector<int> ClusterAssignment::cluster_sizes() const {
    std::vector<int> sizes(cluster_count(), 0);
    for (int l : labels) ++sizes[l];
    return sizes;
}

double bipartition_modularity(const std::vector<std::vector<double>>& w,
                              const std::vector<char>& side) {
    int n = static_cast<int>(w.size());
    std::vector<double> deg(n, 0.0);
    double two_m = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            deg[i] += w[i][j];
            two_m += w[i][j];
        }
    if (two_m <= 0) return 0.0;

    double q = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (side[i] == side[j]) q += w[i][j] - deg[i] * deg[j] / two_m;
    return q / two_m;
}

namespace {

// Internal state for incremental modularity over a 2-way partition.
struct TwoWayState {
    const std::vector<std::vector<double>>& w;
    std::vector<char> side;
    std::vector<double> deg;
    double two_m = 0;
    double internal[2] = {0, 0};  // sum of w_ij over ordered pairs inside each side
    double degsum[2] = {0, 0};
    int count[2] = {0, 0};

    explicit TwoWayState(const std::vector<std::vector<double>>& w_, const std::vector<char>& s)
        : w(w_), side(s) {
        int n = static_cast<int>(w.size());
        deg.assign(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) deg[i] += w[i][j];
        for (int i = 0; i < n; ++i) {
            two_m += deg[i];
            degsum[side[i]] += deg[i];
            ++count[side[i]];
            for (int j = 0; j < n; ++j)
                if (side[j] == side[i]) internal[side[i]] += w[i][j];
        }
    }

    double modularity() const {
        if (two_m <= 0) return 0.0;
        double q = 0;
        for (int s = 0; s < 2; ++s)
            q += internal[s] / two_m - (degsum[s] / two_m) * (degsum[s] / two_m);
        return q;
    }

    void move(int v) {
        int from = side[v], to = 1 - from;
        double to_from = 0, to_to = 0;
        int n = static_cast<int>(w.size());
        for (int j = 0; j < n; ++j) {
            if (j == v) continue;
            if (side[j] == from)
                to_from += w[v][j];
            else
                to_to += w[v][j];
        }
        internal[from] -= 2 * to_from;
        internal[to] += 2 * to_to;
        degsum[from] -= deg[v];
        degsum[to] += deg[v];
        --count[from];
        ++count[to];
        side[v] = to;
    }
};

// Splits whose modularity is this close to zero are floating noise, not
// community structure; they must not be accepted.
constexpr double kModularityEps = 1e-12;

Bipartition exact_bipartition(const std::vector<std::vector<double>>& w) {
    int n = static_cast<int>(w.size());
    Bipartition best;
    best.side.assign(n, 0);
    best.modularity = kModularityEps;
    // node 0 pinned to side 0; enumerate the rest
    for (std::uint32_t mask = 1; mask < (1u << (n - 1)); ++mask) {
        std::vector<char> side(n, 0);
        for (int i = 1; i < n; ++i) side[i] = (mask >> (i - 1)) & 1;
        double q = bipartition_modularity(w, side);
        if (q > best.modularity) {
            best.modularity = q;
            best.side = side;
            best.accepted = true;
        }
    }
    if (!best.accepted) best.modularity = 0;
    return best;
}

Bipartition spectral_bipartition(const std::vector<std::vector<double>>& w) {
    int n = static_cast<int>(w.size());
    Eigen::MatrixXd W(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) W(i, j) = w[i][j];
    Eigen::MatrixXd L = Eigen::MatrixXd(W.rowwise().sum().asDiagonal()) - W;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L);
    Eigen::VectorXd fiedler = solver.eigenvectors().col(1);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fiedler(a) < fiedler(b); });

    // sweep: best prefix cut along the Fiedler ordering
    TwoWayState state(w, std::vector<char>(n, 0));
    Bipartition best;
    best.side.assign(n, 0);
    best.modularity = kModularityEps;
    for (int cut = 0; cut < n - 1; ++cut) {
        state.move(order[cut]);
        double q = state.modularity();
        if (q > best.modularity) {
            best.modularity = q;
            best.side = state.side;
            best.accepted = true;
        }
    }
    if (!best.accepted) {
        best.modularity = 0;
        // seed refinement from the plain sign split anyway
        for (int i = 0; i < n; ++i) best.side[i] = fiedler(i) >= 0 ? 1 : 0;
    }

    // greedy node-move refinement, best-improvement passes
    TwoWayState refine(w, best.side);
    double current = refine.modularity();
    for (int pass = 0; pass < 200; ++pass) {
        int best_v = -1;
        double best_gain = 1e-12;
        for (int v = 0; v < n; ++v) {
            if (refine.count[refine.side[v]] == 1) continue;  // keep both sides nonempty
            TwoWayState trial = refine;
            trial.move(v);
            double gain = trial.modularity() - current;
            if (gain > best_gain) {
                best_gain = gain;
                best_v = v;
            }
        }
        if (best_v < 0) break;
        refine.move(best_v);
        current = refine.modularity();
    }
    if (current > best.modularity && current > kModularityEps) {
        best.modularity = current;
        best.side = refine.side;
        best.accepted = true;
    }
    return best;
}

}  // namespace

Bipartition best_bipartition(const std::vector<std::vector<double>>& w) {
    int n = static_cast<int>(w.size());
    Bipartition none;
    none.side.assign(n, 0);
    if (n < 2) return none;
    if (n <= 16) return exact_bipartition(w);
    return spectral_bipartition(w);
}

namespace {

void divisive_rec(const SimilarityGraph& g, const std::vector<int>& nodes, int depth,
                  int min_size, int max_depth, std::vector<int>& labels, int& next_cluster,
                  std::vector<ClusterSplit>& tree, int parent) {
    int n = static_cast<int>(nodes.size());
    auto make_leaf = [&]() {
        for (int v : nodes) labels[v] = next_cluster;
        ++next_cluster;
    };
    if (n == 1 || depth >= max_depth) {
        make_leaf();
        return;
    }

    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) w[i][j] = g.weight(nodes[i], nodes[j]);

    Bipartition split = best_bipartition(w);
    if (!split.accepted || split.modularity <= 0) {
        make_leaf();
        return;
    }
    std::vector<int> left, right;
    for (int i = 0; i < n; ++i)
        (split.side[i] == 0 ? left : right).push_back(nodes[i]);
    if (static_cast<int>(left.size()) < min_size || static_cast<int>(right.size()) < min_size) {
        make_leaf();
        return;
    }

    int split_id = static_cast<int>(tree.size());
    tree.push_back({parent, -1, -1, split.modularity});
    tree[split_id].left = next_cluster;
    divisive_rec(g, left, depth + 1, min_size, max_depth, labels, next_cluster, tree, split_id);
    tree[split_id].right = next_cluster;
    divisive_rec(g, right, depth + 1, min_size, max_depth, labels, next_cluster, tree, split_id);
}

}  // namespace

ClusterAssignment divisive_cluster(const SimilarityGraph& graph, int min_size, int max_depth) {
    int n = graph.size();
    if (n == 0) throw std::invalid_argument("divisive_cluster: empty graph");
    if (min_size < 1) min_size = 1;

    ClusterAssignment out;
    out.users = graph.users;
    out.labels.assign(n, -1);
    out.method = "divisive";

    // connected components over positive-weight edges
    std::vector<int> comp(n, -1);
    int n_comp = 0;
    for (int start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        std::vector<int> stack{start};
        comp[start] = n_comp;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int u = 0; u < n; ++u)
                if (comp[u] < 0 && graph.weight(v, u) > 0) {
                    comp[u] = n_comp;
                    stack.push_back(u);
                }
        }
        ++n_comp;
    }

    int next_cluster = 0;
    for (int c = 0; c < n_comp; ++c) {
        std::vector<int> nodes;
        for (int v = 0; v < n; ++v)
            if (comp[v] == c) nodes.push_back(v);
        divisive_rec(graph, nodes, 0, min_size, max_depth, out.labels, next_cluster, out.tree, -1);
    }
    return out;
}

double chi_square_feature(const std::vector<FeatureVector>& vectors,
                          const std::vector<int>& labels, int cluster_id, int feature) {
    double in_f = 0, in_rest = 0, out_f = 0, out_rest = 0;
    for (size_t u = 0; u < vectors.size(); ++u) {
        double f = 0;
        auto it = vectors[u].counts.find(feature);
        if (it != vectors[u].counts.end()) f = static_cast<double>(it->second);
        double rest = static_cast<double>(vectors[u].total()) - f;
        if (labels[u] == cluster_id) {
            in_f += f;
            in_rest += rest;
        } else {
            out_f += f;
            out_rest += rest;
        }
    }
    double row1 = in_f + in_rest, row2 = out_f + out_rest;
    double col1 = in_f + out_f, col2 = in_rest + out_rest;
    double total = row1 + row2;
    if (row1 <= 0 || row2 <= 0 || col1 <= 0 || col2 <= 0) return 0.0;

    double chi2 = 0;
    const double obs[2][2] = {{in_f, in_rest}, {out_f, out_rest}};
    const double rows[2] = {row1, row2}, cols[2] = {col1, col2};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            double e = rows[r] * cols[c] / total;
            chi2 += (obs[r][c] - e) * (obs[r][c] - e) / e;
        }
    return chi2;
}

ClusterProfile characterize_cluster(const std::vector<FeatureVector>& vectors,
                                    const std::vector<int>& labels, const Vocabulary& vocab,
                                    int cluster_id, int top_n) {
    ClusterProfile profile;
    profile.cluster_id = cluster_id;

    // single pass: per-feature mass inside/outside the cluster
    std::vector<double> in_f(vocab.size(), 0.0), out_f(vocab.size(), 0.0);
    double in_total = 0, out_total = 0;
    for (size_t u = 0; u < vectors.size(); ++u) {
        bool inside = labels[u] == cluster_id;
        if (inside) ++profile.size;
        for (auto& [idx, c] : vectors[u].counts) {
            if (inside) {
                in_f[idx] += static_cast<double>(c);
                in_total += static_cast<double>(c);
            } else {
                out_f[idx] += static_cast<double>(c);
                out_total += static_cast<double>(c);
            }
        }
    }

    std::vector<std::pair<KGram, double>> scored;
    scored.reserve(vocab.size());
    double total = in_total + out_total;
    for (int f = 0; f < vocab.size(); ++f) {
        double chi2 = 0;
        double col1 = in_f[f] + out_f[f];
        double col2 = total - col1;
        if (in_total > 0 && out_total > 0 && col1 > 0 && col2 > 0) {
            const double obs[2][2] = {{in_f[f], in_total - in_f[f]}, {out_f[f], out_total - out_f[f]}};
            const double rows[2] = {in_total, out_total}, cols[2] = {col1, col2};
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) {
                    double e = rows[r] * cols[c] / total;
                    chi2 += (obs[r][c] - e) * (obs[r][c] - e) / e;
                }
        }
        scored.emplace_back(vocab.grams[f], chi2);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.second > b.second;
    });
    if (top_n < static_cast<int>(scored.size())) scored.resize(top_n);
    profile.top_features = std::move(scored);
    return profile;
}

SuperClusterAssignment make_super_cluster(const ClusterAssignment& assignment, int top_k) {
    SuperClusterAssignment out;
    out.users = assignment.users;
    auto sizes = assignment.cluster_sizes();
    int n_clusters = static_cast<int>(sizes.size());

    std::vector<int> order(n_clusters);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
        return a < b;
    });

    std::vector<int> super_of(n_clusters, 4);
    int kept = std::min(top_k, n_clusters);
    for (int r = 0; r < kept; ++r) {
        super_of[order[r]] = r + 1;
        out.base_of.push_back(order[r]);
    }
    out.c4_empty_warning = n_clusters <= top_k;

    out.labels.reserve(assignment.labels.size());
    for (int l : assignment.labels) out.labels.push_back(super_of[l]);
    return out;
}

namespace {

Eigen::MatrixXd to_dense(const std::vector<FeatureVector>& vectors, int dim, bool normalize) {
    int n = static_cast<int>(vectors.size());
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, dim);
    for (int i = 0; i < n; ++i) {
        for (auto& [idx, c] : vectors[i].counts) x(i, idx) = static_cast<double>(c);
        if (normalize) {
            double norm = x.row(i).norm();
            if (norm > 0) x.row(i) /= norm;
        }
    }
    return x;
}

std::vector<int> lloyd(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
    int n = static_cast<int>(x.rows());
    Eigen::MatrixXd centroids(k, x.cols());

    // k-means++ seeding
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    int first = static_cast<int>(uniform01(rng) * n);
    centroids.row(0) = x.row(std::min(first, n - 1));
    for (int c = 1; c < k; ++c) {
        double total = 0;
        for (int i = 0; i < n; ++i) {
            double d = (x.row(i) - centroids.row(c - 1)).squaredNorm();
            d2[i] = std::min(d2[i], d);
            total += d2[i];
        }
        int pick = 0;
        if (total > 0) {
            double r = uniform01(rng) * total, acc = 0;
            for (int i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<int>(uniform01(rng) * n);
            pick = std::min(pick, n - 1);
        }
        centroids.row(c) = x.row(pick);
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < 300; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (x.row(i) - centroids.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                double d = (x.row(i) - centroids.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        // recompute centroids; empty clusters grab the farthest point
        std::vector<int> counts(k, 0);
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
        for (int i = 0; i < n; ++i) {
            sums.row(assign[i]) += x.row(i);
            ++counts[assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centroids.row(c) = sums.row(c) / counts[c];
            } else {
                int far = 0;
                double far_d = -1;
                for (int i = 0; i < n; ++i) {
                    double d = (x.row(i) - centroids.row(assign[i])).squaredNorm();
                    if (d > far_d && counts[assign[i]] > 1) {
                        far_d = d;
                        far = i;
                    }
                }
                centroids.row(c) = x.row(far);
            }
        }
    }
    return assign;
}

}  // namespace

ClusterAssignment kmeans_baseline(const std::vector<FeatureVector>& vectors, int dim, int k,
                                  std::uint64_t seed, bool normalize) {
    int n = static_cast<int>(vectors.size());
    if (k < 1) throw std::invalid_argument("kmeans_baseline: k must be >= 1");
    if (k > n) throw std::invalid_argument("kmeans_baseline: k exceeds number of users");

    Eigen::MatrixXd x = to_dense(vectors, dim, normalize);
    std::mt19937_64 rng(seed);
    std::vector<int> assign = lloyd(x, k, rng);

    // relabel to dense ids in order of first occurrence for determinism
    std::map<int, int> remap;
    ClusterAssignment out;
    out.method = "kmeans";
    for (const auto& v : vectors) out.users.push_back(v.user_id);
    for (int a : assign) {
        auto [it, _] = remap.try_emplace(a, static_cast<int>(remap.size()));
        out.labels.push_back(it->second);
    }
    return out;
}

double kmeans_inertia(const std::vector<FeatureVector>& vectors, int dim,
                      const ClusterAssignment& assignment) {
    Eigen::MatrixXd x = to_dense(vectors, dim, false);
    int k = assignment.cluster_count();
    int n = static_cast<int>(vectors.size());
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, dim);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
        sums.row(assignment.labels[i]) += x.row(i);
        ++counts[assignment.labels[i]];
    }
    double inertia = 0;
    for (int i = 0; i < n; ++i) {
        int c = assignment.labels[i];
        inertia += (x.row(i) - sums.row(c) / counts[c]).squaredNorm();
    }
    return inertia;
}

ElbowResult elbow_select(const std::vector<FeatureVector>& vectors, int dim, int k_max,
                         std::uint64_t seed) {
    if (k_max < 2) throw std::invalid_argument("elbow_select: k_max must be >= 2");
    ElbowResult res;
    int n = static_cast<int>(vectors.size());
    k_max = std::min(k_max, n);
    for (int k = 1; k <= k_max; ++k) {
        auto a = kmeans_baseline(vectors, dim, k, seed);
        res.inertia.push_back(kmeans_inertia(vectors, dim, a));
    }
    if (k_max == 2) {
        res.k = 2;
        res.flat_curve_warning = true;
        return res;
    }

    double i_first = res.inertia.front(), i_last = res.inertia.back();
    double range = i_first - i_last;
    if (range <= 0) {
        res.k = 1;
        res.flat_curve_warning = true;
        return res;
    }

    // normalized perpendicular distance from the chord (kneedle)
    double best_d = 0;
    int best_k = 1;
    int m = static_cast<int>(res.inertia.size());
    for (int i = 0; i < m; ++i) {
        double xn = static_cast<double>(i) / (m - 1);
        double yn = (res.inertia[i] - i_last) / range;
        // chord runs (0,1) -> (1,0); distance = |xn + yn - 1| / sqrt(2)
        double d = std::abs(xn + yn - 1) / std::sqrt(2.0);
        if (d > best_d) {
            best_d = d;
            best_k = i + 1;
        }
    }
    if (best_d < 0.05) {
        res.k = 1;
        res.flat_curve_warning = true;
    } else {
        res.k = best_k;
    }
    return res;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: size mismatch");
    std::map<std::pair<int, int>, long long> joint;
    std::map<int, long long> ca, cb;
    for (size_t i = 0; i < a.size(); ++i) {
        ++joint[{a[i], b[i]}];
        ++ca[a[i]];
        ++cb[b[i]];
    }
    auto comb2 = [](long long x) { return x * (x - 1) / 2.0; };
    double sum_joint = 0, sum_a = 0, sum_b = 0;
    for (auto& [_, c] : joint) sum_joint += comb2(c);
    for (auto& [_, c] : ca) sum_a += comb2(c);
    for (auto& [_, c] : cb) sum_b += comb2(c);
    double n2 = comb2(static_cast<long long>(a.size()));
    double expected = sum_a * sum_b / n2;
    double max_index = (sum_a + sum_b) / 2.0;
    if (max_index == expected) return 1.0;  // both partitions trivial
    return (sum_joint - expected) / (max_index - expected);
}

}  // namespace csq
