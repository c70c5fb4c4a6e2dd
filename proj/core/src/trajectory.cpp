#include "csq/trajectory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <set>
#include <sstream>

#include "csq/csv.hpp"
#include "json.hpp"

namespace csq {

const char* gap_label(GapBin bin) {
    switch (bin) {
        case GapBin::T1: return "T[1]";
        case GapBin::T2: return "T[2]";
        case GapBin::T3: return "T[3]";
        case GapBin::T4: return "T[4]";
    }
    return "T[?]";
}

std::string action_token(const std::string& category, const std::string& subcategory) {
    auto canon = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == ' ')
                out += '-';
            else
                out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        // collapse leading/trailing hyphens from stray spaces
        while (!out.empty() && out.front() == '-') out.erase(out.begin());
        while (!out.empty() && out.back() == '-') out.pop_back();
        return out;
    };
    std::string tok = canon(category);
    if (!subcategory.empty()) tok += "_" + canon(subcategory);
    return tok;
}

double parse_timestamp(const std::string& text) {
    int day, mon, year, h, m;
    double sec;
    char tail[8] = {0};

    auto to_epoch = [](int y, int mo, int d, int hh, int mm, double ss) {
        std::tm tm{};
        tm.tm_year = y - 1900;
        tm.tm_mon = mo - 1;
        tm.tm_mday = d;
        tm.tm_hour = hh;
        tm.tm_min = mm;
        tm.tm_sec = 0;
        time_t base = timegm(&tm);
        return static_cast<double>(base) + ss;
    };

    // RFC-3339: YYYY-MM-DD[T ]HH:MM:SS[.frac][Z]
    if (std::sscanf(text.c_str(), "%d-%d-%d%*1[T ]%d:%d:%lf%1s", &year, &mon, &day, &h, &m,
                    &sec, tail) >= 6) {
        if (tail[0] != '\0' && tail[0] != 'Z')
            throw ParseError("timestamp: trailing garbage in '" + text + "'");
        return to_epoch(year, mon, day, h, m, sec);
    }
    // Table-2 locale style: D.M.YYYY H:MM:SS
    if (std::sscanf(text.c_str(), "%d.%d.%d %d:%d:%lf%1s", &day, &mon, &year, &h, &m, &sec,
                    tail) >= 6 &&
        tail[0] == '\0') {
        return to_epoch(year, mon, day, h, m, sec);
    }
    throw ParseError("timestamp: cannot parse '" + text + "'");
}

std::optional<GapBin> bin_gap(double seconds) {
    if (seconds < 0) throw std::invalid_argument("bin_gap: negative duration");
    if (seconds < 1) return GapBin::T1;
    if (seconds < 60) return GapBin::T2;
    if (seconds < 3600) return GapBin::T3;
    if (seconds < 86400) return GapBin::T4;
    return std::nullopt;
}

namespace {

const std::vector<std::string> kLogHeader = {"action_id", "user_id",     "timestamp",
                                             "category",  "subcategory", "question_id"};

ActionRecord make_record(const std::vector<std::string>& f, long row) {
    ActionRecord r;
    try {
        size_t pos = 0;
        r.action_id = std::stoll(f[0], &pos);
        if (pos != f[0].size()) throw std::invalid_argument("action_id");
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ": bad action_id '" + f[0] + "'");
    }
    r.user_id = f[1];
    if (r.user_id.empty()) throw ParseError("row " + std::to_string(row) + ": empty user_id");
    try {
        r.timestamp = parse_timestamp(f[2]);
    } catch (const ParseError& e) {
        throw ParseError("row " + std::to_string(row) + ": " + e.what());
    }
    r.category = f[3];
    if (r.category.empty()) throw ParseError("row " + std::to_string(row) + ": empty category");
    r.subcategory = f[4];
    r.question_id = f[5];
    return r;
}

}  // namespace

std::vector<ActionRecord> parse_log(std::istream& in, LogFormat format) {
    std::vector<ActionRecord> records;
    std::set<std::pair<std::string, long long>> seen;

    auto check_dup = [&](const ActionRecord& r, long row) {
        if (!seen.insert({r.user_id, r.action_id}).second)
            throw ParseError("row " + std::to_string(row) + ": duplicate action_id " +
                             std::to_string(r.action_id) + " for user " + r.user_id);
    };

    if (format == LogFormat::Csv) {
        CsvReader reader(in);
        auto header = reader.next();
        if (!header || *header != kLogHeader)
            throw ParseError("log: missing or wrong CSV header, expected "
                             "action_id,user_id,timestamp,category,subcategory,question_id");
        while (auto row = reader.next()) {
            if (row->size() == 1 && (*row)[0].empty()) continue;  // blank line
            if (row->size() != 6)
                throw ParseError("row " + std::to_string(reader.line()) + ": expected 6 fields, got " +
                                 std::to_string(row->size()));
            ActionRecord r = make_record(*row, reader.line());
            check_dup(r, reader.line());
            records.push_back(std::move(r));
        }
        return records;
    }

    // JSONL
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("row " + std::to_string(lineno) + ": bad JSON: " + e.what());
        }
        auto str_of = [&](const char* key) -> std::string {
            if (!j.contains(key) || j[key].is_null()) return "";
            if (j[key].is_string()) return j[key].get<std::string>();
            if (j[key].is_number_integer()) return std::to_string(j[key].get<long long>());
            throw ParseError("row " + std::to_string(lineno) + ": field " + key +
                             " has unexpected type");
        };
        std::vector<std::string> f = {str_of("action_id"), str_of("user_id"),
                                      str_of("timestamp"), str_of("category"),
                                      str_of("subcategory"), str_of("question_id")};
        ActionRecord r = make_record(f, lineno);
        check_dup(r, lineno);
        records.push_back(std::move(r));
    }
    return records;
}

std::map<std::string, TokenSequence> build_trajectories(std::vector<ActionRecord> records) {
    std::map<std::string, std::vector<ActionRecord>> by_user;
    for (auto& r : records) by_user[r.user_id].push_back(std::move(r));

    std::map<std::string, TokenSequence> out;
    for (auto& [user, recs] : by_user) {
        std::sort(recs.begin(), recs.end(), [](const ActionRecord& a, const ActionRecord& b) {
            if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
            return a.action_id < b.action_id;
        });
        TokenSequence seq;
        seq.user_id = user;
        std::vector<std::string> segment;
        for (size_t i = 0; i < recs.size(); ++i) {
            if (!segment.empty()) {
                double gap = recs[i].timestamp - recs[i - 1].timestamp;
                auto bin = bin_gap(std::max(0.0, gap));
                if (!bin) {
                    seq.segments.push_back(std::move(segment));
                    segment.clear();
                } else {
                    segment.push_back(gap_label(*bin));
                }
            }
            segment.push_back(action_token(recs[i].category, recs[i].subcategory));
        }
        if (!segment.empty()) seq.segments.push_back(std::move(segment));
        out.emplace(user, std::move(seq));
    }
    return out;
}

std::string format_segment(const std::vector<std::string>& segment) {
    std::string line;
    for (size_t i = 0; i < segment.size(); ++i) {
        if (i) line += ' ';
        line += segment[i];
    }
    return line;
}

void write_trajectories(std::ostream& out, const std::map<std::string, TokenSequence>& seqs) {
    for (const auto& [user, seq] : seqs)
        for (const auto& segment : seq.segments)
            out << user << '\t' << format_segment(segment) << '\n';
}

std::map<std::string, TokenSequence> read_trajectories(std::istream& in) {
    std::map<std::string, TokenSequence> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("trajectory dump: missing TAB in line");
        std::string user = line.substr(0, tab);
        std::istringstream toks(line.substr(tab + 1));
        std::vector<std::string> segment;
        std::string tok;
        while (toks >> tok) segment.push_back(tok);
        if (segment.empty()) continue;
        auto& seq = out[user];
        seq.user_id = user;
        seq.segments.push_back(std::move(segment));
    }
    return out;
}

}  // namespace csq
