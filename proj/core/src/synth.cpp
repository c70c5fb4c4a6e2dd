#include "csq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "csq/csv.hpp"

namespace csq {

namespace {

constexpr double kEpoch = 1578268800.0;  // 2020-01-06T00:00:00Z, a Monday
constexpr int kOptions = 5;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double normal(std::mt19937_64& rng, double mean, double sigma) {
    // Box-Muller, one value per call for reproducibility across stdlibs
    double u1 = std::max(uniform01(rng), 1e-300);
    double u2 = uniform01(rng);
    return mean + sigma * std::sqrt(-2 * std::log(u1)) * std::cos(2 * 3.141592653589793 * u2);
}

int pick(std::mt19937_64& rng, int n) {
    return std::min(static_cast<int>(uniform01(rng) * n), n - 1);
}

std::string format_rfc3339(double epoch_seconds) {
    time_t t = static_cast<time_t>(epoch_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Inverse of action_token for generated tokens: "consensus-chart_view" ->
// ("consensus chart", "view").
std::pair<std::string, std::string> token_to_category(const std::string& tok) {
    std::string cat = tok, sub;
    auto us = tok.find('_');
    if (us != std::string::npos) {
        cat = tok.substr(0, us);
        sub = tok.substr(us + 1);
    }
    std::replace(cat.begin(), cat.end(), '-', ' ');
    std::replace(sub.begin(), sub.end(), '-', ' ');
    return {cat, sub};
}

double realize_gap(std::mt19937_64& rng, const std::string& gap_token) {
    if (gap_token == "T[1]") return 0;
    if (gap_token == "T[2]") return 5 + std::floor(uniform01(rng) * 45);
    if (gap_token == "T[3]") return 120 + std::floor(uniform01(rng) * 2000);
    return 90000 + std::floor(uniform01(rng) * 40000);  // T[4]-ish, unused in loops
}

struct UserState {
    std::string id;
    const ArchetypeSpec* spec = nullptr;
    std::vector<double> bias;           // per-option systematic offset
    std::vector<int> question_order;    // personal order of new questions
    int next_new = 0;
    std::vector<int> answered;
    long long next_action_id = 1;
};

}  // namespace

std::string ArchetypeSpec::signature_kgram() const {
    std::string out;
    for (size_t i = 0; i < signature_template.size(); ++i) {
        if (i) out += ' ';
        out += signature_template[i];
    }
    return out;
}

std::vector<ArchetypeSpec> default_archetypes(int users_per_archetype) {
    ArchetypeSpec copycat;
    copycat.name = "copycat";
    copycat.count = users_per_archetype;
    copycat.signature_template = {"rating", "T[2]", "consensus-chart_view", "T[2]",
                                  "forecast_create"};
    copycat.filler_actions = {"leaderboard_view", "badges_view"};
    copycat.p_copy = 0.8;
    copycat.p_view_chart = 1.0;
    copycat.forecast_noise = 10;
    copycat.user_bias_sigma = 10;
    copycat.rationale_words = 35;
    copycat.misspell_rate = 0.02;

    ArchetypeSpec speeder;
    speeder.name = "speeder";
    speeder.count = users_per_archetype;
    speeder.signature_template = {"view", "T[1]", "view", "T[1]", "forecast_create"};
    speeder.filler_actions = {"home_view", "scroll"};
    speeder.p_copy = 0;
    speeder.p_view_chart = 0.3;
    speeder.forecast_noise = 25;
    speeder.user_bias_sigma = 10;
    speeder.rationale_words = 25;
    speeder.misspell_rate = 0.05;

    ArchetypeSpec skimmer;
    skimmer.name = "skimmer";
    skimmer.count = users_per_archetype;
    skimmer.signature_template = {"news-articles_view", "T[3]", "news-articles_view", "T[3]",
                                  "forecast_create"};
    skimmer.filler_actions = {"search", "history-charts_view"};
    skimmer.p_copy = 0;
    skimmer.p_view_chart = 0.3;
    skimmer.forecast_noise = 5;
    skimmer.user_bias_sigma = 10;
    skimmer.rationale_words = 10;
    skimmer.misspell_rate = 0.35;

    return {copycat, speeder, skimmer};
}

const std::vector<std::string>& synth_word_bank() {
    static const std::vector<std::string> bank = {
        "the",      "of",       "and",     "to",       "in",      "that",    "is",
        "was",      "for",      "it",      "with",     "as",      "his",     "on",
        "be",       "at",       "by",      "this",     "had",     "not",     "are",
        "but",      "from",     "or",      "have",     "an",      "they",    "which",
        "one",      "you",      "were",    "her",      "all",     "she",     "there",
        "would",    "their",    "we",      "him",      "been",    "has",     "when",
        "who",      "will",     "more",    "no",       "if",      "out",     "so",
        "said",     "what",     "up",      "its",      "about",   "into",    "than",
        "them",     "can",      "only",    "other",    "new",     "some",    "could",
        "time",     "these",    "two",     "may",      "then",    "do",      "first",
        "any",      "my",       "now",     "such",     "like",    "our",     "over",
        "man",      "me",       "even",    "most",     "made",    "after",   "also",
        "did",      "many",     "before",  "must",     "through", "years",   "where",
        "much",     "way",      "well",    "down",     "should",  "because", "each",
        "just",     "those",    "people",  "how",      "too",     "little",  "state",
        "good",     "very",     "make",    "world",    "still",   "own",     "see",
        "men",      "work",     "long",    "get",      "here",    "between", "both",
        "forecast", "question", "trend",   "evidence", "sources", "likely",  "outcome",
        "expect",   "recent",   "reports", "suggest",  "data",    "news",    "shows",
        "increase", "decrease", "stable",  "change",   "region",  "economy", "policy"};
    return bank;
}

SyntheticDataset generate(const std::vector<ArchetypeSpec>& specs, int n_questions,
                          std::uint64_t seed) {
    if (specs.empty()) throw std::invalid_argument("generate: need at least one archetype");
    if (n_questions < 1) throw std::invalid_argument("generate: need at least one question");

    std::mt19937_64 rng(seed);
    SyntheticDataset data;
    const auto& bank = synth_word_bank();

    int n_weeks = std::max(8, (n_questions + 1) / 2);
    double close_time = kEpoch + static_cast<double>(n_weeks + 1) * 7 * 86400;

    // latent truth per question: random simplex point, percentage scale
    std::vector<std::vector<double>> truth_probs(n_questions);
    std::vector<std::string> qids(n_questions);
    for (int q = 0; q < n_questions; ++q) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "q%03d", q + 1);
        qids[q] = buf;
        std::vector<double> p(kOptions);
        double sum = 0;
        for (auto& v : p) {
            v = -std::log(std::max(uniform01(rng), 1e-300));
            sum += v;
        }
        for (auto& v : p) v = v / sum * 100.0;
        truth_probs[q] = p;
        Question question;
        question.question_id = qids[q];
        question.option_count = kOptions;
        question.close_time = close_time;
        question.outcome_index = -1;  // resolved at the end
        data.questions.emplace(qids[q], question);
    }

    // users
    std::vector<UserState> users;
    int uid = 0;
    for (const auto& spec : specs) {
        if (spec.count < 1) throw std::invalid_argument("generate: archetype count must be >= 1");
        for (int i = 0; i < spec.count; ++i) {
            UserState u;
            char buf[16];
            std::snprintf(buf, sizeof buf, "u%04d", ++uid);
            u.id = buf;
            u.spec = &spec;
            u.bias.resize(kOptions);
            for (auto& b : u.bias) b = normal(rng, 0, spec.user_bias_sigma);
            u.question_order.resize(n_questions);
            std::iota(u.question_order.begin(), u.question_order.end(), 0);
            for (int j = n_questions - 1; j > 0; --j)
                std::swap(u.question_order[j], u.question_order[pick(rng, j + 1)]);
            data.truth[u.id] = spec.name;
            users.push_back(std::move(u));
        }
    }

    // per-question forecast list kept sorted by (timestamp, user_id); daily
    // snapshots memoized so generated copies equal the scorer's values
    std::vector<std::vector<const Forecast*>> q_forecasts(n_questions);
    std::map<std::pair<int, long long>, ConsensusSnapshot> snapshot_cache;
    // forecasts must not reallocate under the pointers above
    data.forecasts.reserve(static_cast<size_t>(users.size()) * n_weeks * 5 + 16);

    auto snapshot_at = [&](int q, double t) -> const ConsensusSnapshot* {
        long long day = static_cast<long long>(std::floor(t / 86400.0));
        auto key = std::make_pair(q, day);
        auto it = snapshot_cache.find(key);
        if (it == snapshot_cache.end()) {
            double as_of = static_cast<double>(day) * 86400.0;
            std::vector<const Forecast*> prior;
            for (auto* f : q_forecasts[q])
                if (f->timestamp < as_of) prior.push_back(f);
            it = snapshot_cache.emplace(key, ewm_snapshot(qids[q], prior, as_of, kOptions)).first;
        }
        return &it->second;
    };

    auto honest_forecast = [&](const UserState& u, int q) {
        std::vector<double> p(kOptions);
        double sum = 0;
        for (int o = 0; o < kOptions; ++o) {
            p[o] = truth_probs[q][o] + u.bias[o] + normal(rng, 0, u.spec->forecast_noise);
            p[o] = std::clamp(p[o], 0.0, 100.0);
            sum += p[o];
        }
        if (sum <= 0) return std::vector<double>(kOptions, 100.0 / kOptions);
        for (auto& v : p) v = v / sum * 100.0;
        return p;
    };

    auto make_rationale = [&](const UserState& u, int q) {
        int n_words = std::max(3, static_cast<int>(std::lround(
                                      normal(rng, u.spec->rationale_words,
                                             u.spec->rationale_words / 4.0))));
        std::string text;
        int since_sentence = 0;
        int sentence_len = 6 + pick(rng, 7);
        for (int i = 0; i < n_words; ++i) {
            std::string word = bank[pick(rng, static_cast<int>(bank.size()))];
            if (uniform01(rng) < u.spec->misspell_rate) word += "zz";  // guaranteed miss
            if (!text.empty()) text += ' ';
            text += word;
            if (++since_sentence >= sentence_len && i + 1 < n_words) {
                text += '.';
                since_sentence = 0;
                sentence_len = 6 + pick(rng, 7);
            }
        }
        text += '.';
        // occasional noise token the cleaner must strip
        if (uniform01(rng) < 0.05) text += " http://example.org/ref";
        if (uniform01(rng) < 0.05) text += " @moderator";
        Rationale r;
        r.user_id = u.id;
        r.question_id = qids[q];
        r.raw_text = text;
        r.text = clean_text(text);
        data.rationales.push_back(std::move(r));
    };

    auto add_forecast = [&](const UserState& u, int q, double t, bool is_update,
                            std::vector<double> probs) {
        Forecast f;
        f.user_id = u.id;
        f.question_id = qids[q];
        f.timestamp = t;
        f.is_update = is_update;
        f.probs = std::move(probs);
        data.forecasts.push_back(std::move(f));
        const Forecast* ptr = &data.forecasts.back();
        auto& list = q_forecasts[q];
        auto pos = std::upper_bound(list.begin(), list.end(), ptr,
                                    [](const Forecast* a, const Forecast* b) {
                                        if (a->timestamp != b->timestamp)
                                            return a->timestamp < b->timestamp;
                                        return a->user_id < b->user_id;
                                    });
        list.insert(pos, ptr);
    };

    // one forecast event: filler actions + signature template, then the
    // forecast itself stamped at the forecast_create action. Returns the
    // timestamp after the event.
    auto emit_event = [&](UserState& u, int q, double t, bool is_update) {
        const auto& spec = *u.spec;
        std::vector<std::string> tokens;

        bool views_chart = spec.p_view_chart >= 1.0 || uniform01(rng) < spec.p_view_chart;
        bool chart_in_signature = false;
        for (size_t i = 0; i < spec.signature_template.size(); i += 2)
            if (spec.signature_template[i].rfind("consensus-chart", 0) == 0)
                chart_in_signature = true;

        int n_filler = pick(rng, 3);  // 0..2
        for (int i = 0; i < n_filler; ++i) {
            if (uniform01(rng) > spec.p_filler || spec.filler_actions.empty()) continue;
            if (!tokens.empty()) tokens.push_back(uniform01(rng) < 0.5 ? "T[1]" : "T[2]");
            tokens.push_back(spec.filler_actions[pick(rng, static_cast<int>(spec.filler_actions.size()))]);
        }
        if (views_chart && !chart_in_signature) {
            if (!tokens.empty()) tokens.push_back("T[2]");
            tokens.push_back("consensus-chart_view");
        }
        if (!tokens.empty()) tokens.push_back("T[2]");
        tokens.insert(tokens.end(), spec.signature_template.begin(), spec.signature_template.end());

        double forecast_t = t;
        for (size_t i = 0; i < tokens.size(); i += 2) {
            if (i > 0) t += realize_gap(rng, tokens[i - 1]);
            auto [cat, sub] = token_to_category(tokens[i]);
            data.records.push_back(
                {u.next_action_id++, u.id, t, cat, sub, qids[q]});
            if (tokens[i].rfind("forecast_create", 0) == 0) forecast_t = t;
        }

        bool viewed = views_chart || chart_in_signature;
        const ConsensusSnapshot* snap = viewed ? snapshot_at(q, forecast_t) : nullptr;
        bool copy = snap && snap->visible && uniform01(rng) < spec.p_copy;
        if (copy) {
            std::vector<double> probs = snap->values;
            if (spec.slider_jitter > 0 && kOptions >= 2) {
                int a = pick(rng, kOptions);
                int b = (a + 1 + pick(rng, kOptions - 1)) % kOptions;
                probs[a] += spec.slider_jitter;
                probs[b] -= spec.slider_jitter;
            } else {
                data.copy_events.push_back({u.id, qids[q], forecast_t});
            }
            add_forecast(u, q, forecast_t, is_update, std::move(probs));
        } else {
            add_forecast(u, q, forecast_t, is_update, honest_forecast(u, q));
        }
        return t;
    };

    // Weekly HIT loop: 2 new questions + 3 updates per user-week. Sessions
    // are emitted in global chronological order so the memoized daily
    // snapshots always see every earlier forecast; session starts are
    // arithmetic (not rng) so the order is independent of emission. A
    // session starts 08:00-12:59 and cannot spill past midnight.
    struct Session {
        double t;
        int week;
        int user;
    };
    std::vector<Session> sessions;
    for (int w = 0; w < n_weeks; ++w)
        for (int ui = 0; ui < static_cast<int>(users.size()); ++ui) {
            int day = (ui * 3 + w) % 5;
            double t = kEpoch + (static_cast<double>(w) * 7 + day) * 86400 +
                       (8 + (ui * 7 + w * 13) % 5) * 3600 + (ui * 131 + w * 197) % 3600;
            sessions.push_back({t, w, ui});
        }
    std::sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.user < b.user;
    });

    for (const auto& s : sessions) {
        auto& u = users[s.user];
        double t = s.t;
        for (int e = 0; e < 2 && u.next_new < n_questions; ++e) {
            int q = u.question_order[u.next_new++];
            t = emit_event(u, q, t, false);
            make_rationale(u, q);
            t += 180 + realize_gap(rng, "T[3]");
        }
        for (int e = 0; e < 3 && !u.answered.empty(); ++e) {
            int q = u.answered[pick(rng, static_cast<int>(u.answered.size()))];
            t = emit_event(u, q, t, true);
            t += 180 + realize_gap(rng, "T[3]");
        }
        // questions just answered become updatable from the next session
        while (static_cast<int>(u.answered.size()) < u.next_new)
            u.answered.push_back(u.question_order[u.answered.size()]);
    }

    // resolve outcomes from the latent truth
    for (int q = 0; q < n_questions; ++q) {
        double r = uniform01(rng) * 100.0, acc = 0;
        int outcome = kOptions - 1;
        for (int o = 0; o < kOptions; ++o) {
            acc += truth_probs[q][o];
            if (r < acc) {
                outcome = o;
                break;
            }
        }
        data.questions[qids[q]].outcome_index = outcome;
    }
    return data;
}

namespace {

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void write_dataset(const SyntheticDataset& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::string logs = "action_id,user_id,timestamp,category,subcategory,question_id\n";
    for (const auto& r : data.records) {
        logs += csv_join({std::to_string(r.action_id), r.user_id, format_rfc3339(r.timestamp),
                          r.category, r.subcategory, r.question_id});
        logs += '\n';
    }
    atomic_write(dir / "logs.csv", logs);

    int max_opts = 0;
    for (const auto& [_, q] : data.questions) max_opts = std::max(max_opts, q.option_count);
    std::string fc = "user_id,question_id,timestamp,is_update";
    for (int o = 1; o <= max_opts; ++o) fc += ",p" + std::to_string(o);
    fc += '\n';
    for (const auto& f : data.forecasts) {
        std::vector<std::string> row = {f.user_id, f.question_id, format_rfc3339(f.timestamp),
                                        f.is_update ? "1" : "0"};
        for (int o = 0; o < max_opts; ++o)
            row.push_back(o < static_cast<int>(f.probs.size()) ? format_double(f.probs[o]) : "");
        fc += csv_join(row);
        fc += '\n';
    }
    atomic_write(dir / "forecasts.csv", fc);

    std::string qs = "question_id,option_count,close_time,outcome_index\n";
    for (const auto& [_, q] : data.questions) {
        qs += csv_join({q.question_id, std::to_string(q.option_count),
                        format_rfc3339(q.close_time), std::to_string(q.outcome_index)});
        qs += '\n';
    }
    atomic_write(dir / "questions.csv", qs);

    std::string rs = "user_id,question_id,text\n";
    for (const auto& r : data.rationales) {
        rs += csv_join({r.user_id, r.question_id, r.raw_text});
        rs += '\n';
    }
    atomic_write(dir / "rationales.csv", rs);

    std::string ts = "user_id,archetype\n";
    for (const auto& [user, arch] : data.truth) {
        ts += csv_join({user, arch});
        ts += '\n';
    }
    atomic_write(dir / "truth.csv", ts);

    std::string dict;
    for (const auto& w : synth_word_bank()) {
        dict += w;
        dict += '\n';
    }
    atomic_write(dir / "dictionary.txt", dict);
}

}  // namespace csq
