#include "csq/features.hpp"

#include <set>
#include <stdexcept>

namespace csq {

KGramCounts extract_kgrams(const TokenSequence& seq, int k) {
    if (k < 1) throw std::invalid_argument("extract_kgrams: k must be >= 1");
    KGramCounts counts;
    for (const auto& segment : seq.segments) {
        if (static_cast<int>(segment.size()) < k) continue;
        for (size_t start = 0; start + k <= segment.size(); ++start) {
            KGram gram = segment[start];
            for (int i = 1; i < k; ++i) {
                gram += ' ';
                gram += segment[start + i];
            }
            ++counts[gram];
        }
    }
    return counts;
}

Vocabulary build_vocabulary(const std::vector<KGramCounts>& per_user, int min_user_support) {
    if (per_user.empty()) throw std::invalid_argument("build_vocabulary: empty corpus");
    std::map<KGram, int> support;
    for (const auto& user : per_user)
        for (const auto& [gram, _] : user) ++support[gram];

    Vocabulary vocab;
    vocab.min_user_support = min_user_support;
    for (const auto& [gram, users] : support) {
        if (users >= min_user_support) {
            vocab.index.emplace(gram, static_cast<int>(vocab.grams.size()));
            vocab.grams.push_back(gram);
        }
    }
    return vocab;
}

FeatureVector vectorize(const std::string& user_id, const KGramCounts& grams,
                        const Vocabulary& vocab) {
    FeatureVector fv;
    fv.user_id = user_id;
    for (const auto& [gram, count] : grams) {
        auto it = vocab.index.find(gram);
        if (it != vocab.index.end()) fv.counts[it->second] = count;
    }
    return fv;
}

}  // namespace csq
