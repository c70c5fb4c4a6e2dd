#pragma once

#include <istream>
#include <optional>
#include <set>
#include <string>

namespace csq {

struct Rationale {
    std::string user_id;
    std::string question_id;
    std::string text;      // cleaned
    std::string raw_text;  // as ingested
};

struct TextStats {
    long long ch = 0;        // alphanumeric characters
    long long wo = 0;        // whitespace tokens containing >= 1 alnum
    long long se = 0;        // terminator-delimited sentences, fragment counts as one
    long long misspells = 0;
};

// Strips tokens that look like URLs (scheme prefix or www.) or @-mentions.
// Idempotent.
std::string clean_text(const std::string& raw);

TextStats text_stats(const std::string& cleaned);

// CLI = 5.89 ch/wo - 0.3 se/wo - 15.8; absent when wo = 0.
// textbook = true switches to the per-100-words Coleman-Liau form.
std::optional<double> cli_score(const TextStats& s, bool textbook = false);

// ARI = 4.71 ch/wo + 0.5 wo/se - 21.43; absent when wo = 0 or se = 0.
std::optional<double> ari_score(const TextStats& s, bool textbook = false);

class Dictionary {
public:
    static Dictionary load(std::istream& in);  // newline-delimited wordlist

    // Case-insensitive; numerals and single letters always count as valid.
    bool contains(const std::string& word) const;
    size_t size() const { return words_.size(); }

private:
    std::set<std::string> words_;
};

// Out-of-dictionary words / wo; absent when wo = 0.
std::optional<double> misspell_rate(const std::string& cleaned, const Dictionary& dict);

}  // namespace csq
