#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace csq {

// Raised for malformed input files; carries enough context to locate the row.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ActionRecord {
    long long action_id = 0;
    std::string user_id;
    double timestamp = 0;  // epoch seconds
    std::string category;
    std::string subcategory;  // empty = absent
    std::string question_id;  // empty = absent
};

enum class GapBin { T1, T2, T3, T4 };

// A segment is an alternating run of action and gap tokens, actions at both
// ends. Gap tokens are stored in their display form "T[1]".."T[4]".
struct TokenSequence {
    std::string user_id;
    std::vector<std::vector<std::string>> segments;
};

inline bool is_gap_token(const std::string& tok) {
    return tok.size() == 4 && tok[0] == 'T' && tok[1] == '[' && tok[3] == ']' &&
           tok[2] >= '1' && tok[2] <= '4';
}

const char* gap_label(GapBin bin);

// "Consensus chart" + "View" -> "consensus-chart_view"; lowercases, spaces
// become hyphens, subcategory joined with '_' when present.
std::string action_token(const std::string& category, const std::string& subcategory);

// Accepts "D.M.YYYY H:MM:SS" and RFC-3339 ("YYYY-MM-DDTHH:MM:SS", 'T' or
// space, optional fractional seconds, optional 'Z'). Interpreted as UTC.
double parse_timestamp(const std::string& text);

// nullopt = session break (gap of one day or more); negative gaps throw.
std::optional<GapBin> bin_gap(double seconds);

enum class LogFormat { Csv, Jsonl };

std::vector<ActionRecord> parse_log(std::istream& in, LogFormat format);

std::map<std::string, TokenSequence> build_trajectories(std::vector<ActionRecord> records);

// Table-3 style dump: one line per segment, "user_id<TAB>tok tok tok".
void write_trajectories(std::ostream& out, const std::map<std::string, TokenSequence>& seqs);
std::map<std::string, TokenSequence> read_trajectories(std::istream& in);

std::string format_segment(const std::vector<std::string>& segment);

}  // namespace csq
