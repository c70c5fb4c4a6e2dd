#include <random>

#include "csq/features.hpp"
#include "doctest.h"

using namespace csq;

namespace {

TokenSequence seq_of(const std::string& user,
                     std::vector<std::vector<std::string>> segs) {
    TokenSequence s;
    s.user_id = user;
    s.segments = std::move(segs);
    return s;
}

}  // namespace

TEST_CASE("extract_kgrams window counts") {
    auto s = seq_of("u", {{"a", "T[2]", "b", "T[2]", "c", "T[2]", "d"}});
    auto grams = extract_kgrams(s, 5);
    long long total = 0;
    for (auto& [g, c] : grams) total += c;
    CHECK(total == 3);  // 7 - 5 + 1 windows
    CHECK(grams.count("a T[2] b T[2] c") == 1);
    CHECK(grams.count("b T[2] c T[2] d") == 1);
}

TEST_CASE("extract_kgrams single window and repeats") {
    auto s = seq_of("u", {{"a", "T[2]", "a", "T[2]", "a"}});
    auto grams = extract_kgrams(s, 5);
    REQUIRE(grams.size() == 1);
    CHECK(grams.at("a T[2] a T[2] a") == 1);
}

TEST_CASE("kgrams never span a session break") {
    auto s = seq_of("u", {{"a", "T[1]", "b", "T[1]", "c"},
                          {"d", "T[1]", "e", "T[1]", "f"}});
    auto grams = extract_kgrams(s, 5);
    REQUIRE(grams.size() == 2);
    CHECK(grams.count("a T[1] b T[1] c") == 1);
    CHECK(grams.count("d T[1] e T[1] f") == 1);
    for (auto& [g, _] : grams) CHECK(g.find("c T") == std::string::npos);
}

TEST_CASE("short segments contribute nothing") {
    auto s = seq_of("u", {{"a", "T[1]", "b"}, {"c"}});
    CHECK(extract_kgrams(s, 5).empty());
    CHECK(extract_kgrams(s, 1).size() == 4);  // each token its own window
}

TEST_CASE("property: window-count formula over random segment lengths") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        TokenSequence s;
        s.user_id = "u";
        long long expected = 0;
        int k = 1 + int(rng() % 6);
        int nseg = 1 + int(rng() % 5);
        for (int i = 0; i < nseg; ++i) {
            int len = 1 + int(rng() % 12);
            std::vector<std::string> seg;
            for (int j = 0; j < len; ++j)
                seg.push_back(j % 2 ? "T[2]" : "t" + std::to_string(rng() % 3));
            s.segments.push_back(seg);
            expected += std::max(0, len - k + 1);
        }
        auto grams = extract_kgrams(s, k);
        long long total = 0;
        for (auto& [_, c] : grams) total += c;
        CHECK(total == expected);
    }
}

TEST_CASE("build_vocabulary support pruning") {
    KGramCounts u1 = {{"a T[1] b", 3}, {"b T[1] c", 1}};
    KGramCounts u2 = {{"a T[1] b", 1}};
    auto shared = build_vocabulary({u1, u2}, 2);
    CHECK(shared.size() == 1);
    CHECK(shared.grams[0] == "a T[1] b");

    auto all = build_vocabulary({u1, u2}, 1);
    CHECK(all.size() == 2);
    // lexicographic index order
    CHECK(all.grams[0] < all.grams[1]);
    CHECK(all.index.at(all.grams[1]) == 1);

    CHECK_THROWS(build_vocabulary({}, 1));
}

TEST_CASE("support counts distinct users, not occurrences") {
    KGramCounts u1 = {{"x T[1] y", 100}};
    auto v = build_vocabulary({u1}, 2);
    CHECK(v.size() == 0);
}

TEST_CASE("vectorize drops out-of-vocabulary grams") {
    KGramCounts u1 = {{"a T[1] b", 2}};
    KGramCounts u2 = {{"a T[1] b", 1}, {"z T[1] z", 5}};
    auto vocab = build_vocabulary({u1, u2}, 2);
    auto fv = vectorize("u2", u2, vocab);
    CHECK(fv.user_id == "u2");
    CHECK(fv.total() == 1);
    auto zero = vectorize("u3", {{"not there", 4}}, vocab);
    CHECK(zero.zero());
}

TEST_CASE("property: vectorize is linear in multiset union") {
    std::mt19937_64 rng(9);
    std::vector<KGram> pool = {"a T[1] b", "b T[1] c", "c T[1] a", "a T[1] a"};
    std::vector<KGramCounts> corpus;
    for (int u = 0; u < 4; ++u) {
        KGramCounts c;
        for (auto& g : pool)
            if (rng() % 2) c[g] = 1 + (long long)(rng() % 5);
        corpus.push_back(c);
    }
    auto vocab = build_vocabulary(corpus, 1);
    for (int trial = 0; trial < 10; ++trial) {
        KGramCounts x, y;
        for (auto& g : pool) {
            if (rng() % 2) x[g] = (long long)(rng() % 4);
            if (rng() % 2) y[g] = (long long)(rng() % 4);
        }
        KGramCounts merged = x;
        for (auto& [g, c] : y) merged[g] += c;
        auto fx = vectorize("u", x, vocab);
        auto fy = vectorize("u", y, vocab);
        auto fm = vectorize("u", merged, vocab);
        std::map<int, long long> sum = fx.counts;
        for (auto& [i, c] : fy.counts) sum[i] += c;
        std::erase_if(sum, [](auto& kv) { return kv.second == 0; });
        auto cleaned = fm.counts;
        std::erase_if(cleaned, [](auto& kv) { return kv.second == 0; });
        CHECK(cleaned == sum);
    }
}
