#pragma once

#include <map>
#include <string>
#include <vector>

#include "csq/trajectory.hpp"

namespace csq {

// A k-gram is stored as its space-joined token window, e.g.
// "view T[2] consensus-chart_view T[2] forecast_create".
using KGram = std::string;

// Multiset of k-grams represented as gram -> multiplicity.
using KGramCounts = std::map<KGram, long long>;

// Sliding window of width k inside each segment; windows never cross a
// session break. Segments shorter than k contribute nothing.
KGramCounts extract_kgrams(const TokenSequence& seq, int k);

struct Vocabulary {
    std::vector<KGram> grams;       // index -> gram, lexicographic
    std::map<KGram, int> index;     // gram -> index
    int min_user_support = 1;

    int size() const { return static_cast<int>(grams.size()); }
};

// Keeps k-grams occurring in at least min_user_support distinct users'
// sequences; index order is lexicographic. Throws on an empty corpus.
Vocabulary build_vocabulary(const std::vector<KGramCounts>& per_user, int min_user_support);

struct FeatureVector {
    std::string user_id;
    std::map<int, long long> counts;  // index -> count, sparse

    long long total() const {
        long long t = 0;
        for (auto& [_, c] : counts) t += c;
        return t;
    }
    bool zero() const { return counts.empty(); }
};

FeatureVector vectorize(const std::string& user_id, const KGramCounts& grams,
                        const Vocabulary& vocab);

}  // namespace csq
