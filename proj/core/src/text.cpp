#include "csq/text.hpp"

#include <cctype>
#include <sstream>

namespace csq {

namespace {

bool is_url_or_mention(const std::string& tok) {
    if (!tok.empty() && tok[0] == '@') return true;
    if (tok.rfind("http://", 0) == 0 || tok.rfind("https://", 0) == 0) return true;
    if (tok.rfind("ftp://", 0) == 0 || tok.rfind("www.", 0) == 0) return true;
    return false;
}

std::string strip_punct(const std::string& tok) {
    size_t a = 0, b = tok.size();
    while (a < b && !std::isalnum(static_cast<unsigned char>(tok[a]))) ++a;
    while (b > a && !std::isalnum(static_cast<unsigned char>(tok[b - 1]))) --b;
    return tok.substr(a, b - a);
}

std::string lower(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

std::string clean_text(const std::string& raw) {
    std::istringstream in(raw);
    std::string tok, out;
    while (in >> tok) {
        if (is_url_or_mention(tok)) continue;
        if (!out.empty()) out += ' ';
        out += tok;
    }
    return out;
}

TextStats text_stats(const std::string& cleaned) {
    TextStats s;
    bool in_word = false, word_has_alnum = false, sentence_open = false;
    for (char raw : cleaned) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            ++s.ch;
            word_has_alnum = true;
            sentence_open = true;
        }
        if (std::isspace(c)) {
            if (in_word && word_has_alnum) ++s.wo;
            in_word = word_has_alnum = false;
        } else {
            in_word = true;
        }
        if (c == '.' || c == '!' || c == '?') {
            if (sentence_open) ++s.se;
            sentence_open = false;
        }
    }
    if (in_word && word_has_alnum) ++s.wo;
    if (sentence_open) ++s.se;  // trailing fragment
    return s;
}

std::optional<double> cli_score(const TextStats& s, bool textbook) {
    if (s.wo == 0) return std::nullopt;
    double ch_wo = static_cast<double>(s.ch) / s.wo;
    double se_wo = static_cast<double>(s.se) / s.wo;
    if (textbook) return 0.0588 * (100 * ch_wo) - 0.296 * (100 * se_wo) - 15.8;
    return 5.89 * ch_wo - 0.3 * se_wo - 15.8;
}

std::optional<double> ari_score(const TextStats& s, bool textbook) {
    if (s.wo == 0 || s.se == 0) return std::nullopt;
    double ch_wo = static_cast<double>(s.ch) / s.wo;
    double wo_se = static_cast<double>(s.wo) / s.se;
    (void)textbook;  // the published ARI already uses this form
    return 4.71 * ch_wo + 0.5 * wo_se - 21.43;
}

Dictionary Dictionary::load(std::istream& in) {
    Dictionary d;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (!line.empty()) d.words_.insert(lower(line));
    }
    return d;
}

bool Dictionary::contains(const std::string& word) const {
    if (word.size() <= 1) return true;
    bool all_digits = true;
    for (char c : word)
        if (!std::isdigit(static_cast<unsigned char>(c))) all_digits = false;
    if (all_digits) return true;
    return words_.count(lower(word)) > 0;
}

std::optional<double> misspell_rate(const std::string& cleaned, const Dictionary& dict) {
    std::istringstream in(cleaned);
    std::string tok;
    long long words = 0, bad = 0;
    while (in >> tok) {
        std::string core = strip_punct(tok);
        if (core.empty()) continue;
        ++words;
        if (!dict.contains(core)) ++bad;
    }
    if (words == 0) return std::nullopt;
    return static_cast<double>(bad) / words;
}

}  // namespace csq
