#include "csq/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csq {

double brier_score(const Forecast& f, const Question& q) {
    if (!q.resolved()) throw std::invalid_argument("brier_score: question " + q.question_id + " unresolved");
    if (static_cast<int>(f.probs.size()) != q.option_count)
        throw std::invalid_argument("brier_score: option count mismatch on " + q.question_id);
    double sum = 0;
    for (int i = 0; i < q.option_count; ++i) {
        double p = f.probs[i] / 100.0;
        double o = i == q.outcome_index ? 1.0 : 0.0;
        sum += (p - o) * (p - o);
    }
    return sum / q.option_count;
}

std::vector<double> question_total_mean(const std::vector<const Forecast*>& all_final) {
    if (all_final.empty()) return {};
    size_t opts = all_final.front()->probs.size();
    std::vector<double> mean(opts, 0.0);
    for (auto* f : all_final)
        for (size_t o = 0; o < opts; ++o) mean[o] += f->probs[o];
    for (auto& m : mean) m /= static_cast<double>(all_final.size());
    return mean;
}

std::optional<double> rmse_from_mean(const std::vector<const Forecast*>& group,
                                     const std::vector<double>& total_mean) {
    if (group.empty()) return std::nullopt;
    double sum = 0;
    for (auto* f : group)
        for (size_t o = 0; o < total_mean.size(); ++o) {
            double d = f->probs[o] - total_mean[o];
            sum += d * d;
        }
    return std::sqrt(sum / static_cast<double>(group.size()));
}

double rmse_from_consensus(const Forecast& f, const ConsensusSnapshot& c) {
    if (f.probs.size() != c.values.size())
        throw std::invalid_argument("rmse_from_consensus: option count mismatch on " + f.question_id);
    double sum = 0;
    for (size_t o = 0; o < f.probs.size(); ++o) {
        double d = f.probs[o] - c.values[o];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(f.probs.size()));
}

ConsensusSnapshot ewm_snapshot(const std::string& question_id,
                               const std::vector<const Forecast*>& prior, double as_of,
                               int option_count, double half_life_days) {
    ConsensusSnapshot snap;
    snap.question_id = question_id;
    snap.as_of = as_of;
    snap.values.assign(option_count, 0.0);
    snap.visible = prior.size() >= 10;
    if (prior.empty()) return snap;

    double half_life = half_life_days * 86400.0;
    double wsum = 0;
    for (auto* f : prior) {
        double w = std::exp2(-(as_of - f->timestamp) / half_life);
        wsum += w;
        for (int o = 0; o < option_count; ++o) snap.values[o] += w * f->probs[o];
    }
    for (auto& v : snap.values) v /= wsum;
    return snap;
}

ConsensusStore ConsensusStore::build(const std::vector<Forecast>& forecasts,
                                     const std::map<std::string, Question>& questions,
                                     double half_life_days) {
    ConsensusStore store;
    std::map<std::string, std::vector<const Forecast*>> by_question;
    for (const auto& f : forecasts) by_question[f.question_id].push_back(&f);

    for (auto& [qid, fs] : by_question) {
        auto qit = questions.find(qid);
        if (qit == questions.end()) continue;
        int opts = qit->second.option_count;
        std::stable_sort(fs.begin(), fs.end(), [](const Forecast* a, const Forecast* b) {
            if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
            return a->user_id < b->user_id;
        });

        double first_day = std::floor(fs.front()->timestamp / 86400.0) + 1;
        double last = std::max(qit->second.close_time, fs.back()->timestamp);
        double last_day = std::floor(last / 86400.0) + 1;

        auto& snaps = store.snapshots_[qid];
        std::vector<const Forecast*> prior;
        size_t next = 0;
        for (double day = first_day; day <= last_day; day += 1) {
            double as_of = day * 86400.0;
            while (next < fs.size() && fs[next]->timestamp < as_of) prior.push_back(fs[next++]);
            snaps.push_back(ewm_snapshot(qid, prior, as_of, opts, half_life_days));
        }
    }
    return store;
}

const ConsensusSnapshot* ConsensusStore::latest_visible(const std::string& question_id,
                                                        double t) const {
    auto it = snapshots_.find(question_id);
    if (it == snapshots_.end()) return nullptr;
    const ConsensusSnapshot* best = nullptr;
    for (const auto& s : it->second) {
        if (s.as_of > t) break;
        if (s.visible) best = &s;
    }
    return best;
}

std::optional<double> UserForecastMetrics::avg_rmse_consensus() const {
    double sum = 0;
    int n = 0;
    for (const auto& q : questions)
        if (q.rmse_consensus) {
            sum += *q.rmse_consensus;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return sum / n;
}

std::optional<double> UserForecastMetrics::copy_paste_prob(double x) const {
    int eligible = 0, hits = 0;
    for (const auto& q : questions)
        if (q.rmse_consensus && q.viewed_chart_before) {
            ++eligible;
            if (*q.rmse_consensus <= x) ++hits;
        }
    if (eligible == 0) return std::nullopt;
    return static_cast<double>(hits) / eligible;
}

std::optional<double> UserForecastMetrics::mean_brier() const {
    double sum = 0;
    int n = 0;
    for (const auto& q : questions)
        if (q.brier) {
            sum += *q.brier;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return sum / n;
}

std::map<std::string, UserForecastMetrics> score_users(
    const std::vector<Forecast>& forecasts, const std::map<std::string, Question>& questions,
    const std::vector<ActionRecord>& records, const ConsensusStore& store, bool use_updates) {
    // first and final forecast per (user, question)
    std::map<std::pair<std::string, std::string>, std::vector<const Forecast*>> by_uq;
    for (const auto& f : forecasts) by_uq[{f.user_id, f.question_id}].push_back(&f);
    for (auto& [_, fs] : by_uq)
        std::stable_sort(fs.begin(), fs.end(), [](const Forecast* a, const Forecast* b) {
            return a->timestamp < b->timestamp;
        });

    // earliest consensus-chart view per (user, question)
    std::map<std::pair<std::string, std::string>, double> chart_view;
    for (const auto& r : records) {
        if (r.question_id.empty()) continue;
        std::string tok = action_token(r.category, r.subcategory);
        if (tok.rfind("consensus-chart", 0) != 0) continue;
        auto key = std::make_pair(r.user_id, r.question_id);
        auto it = chart_view.find(key);
        if (it == chart_view.end() || r.timestamp < it->second) chart_view[key] = r.timestamp;
    }

    std::map<std::string, UserForecastMetrics> out;
    for (auto& [key, fs] : by_uq) {
        const auto& [user, qid] = key;
        auto qit = questions.find(qid);
        if (qit == questions.end()) continue;

        const Forecast* first = fs.front();
        const Forecast* final = fs.back();

        QuestionScore score;
        score.question_id = qid;

        auto rmse_of = [&](const Forecast* f) -> std::optional<double> {
            const ConsensusSnapshot* snap = store.latest_visible(qid, f->timestamp);
            if (!snap) return std::nullopt;
            return rmse_from_consensus(*f, *snap);
        };
        if (use_updates) {
            double sum = 0;
            int n = 0;
            for (auto* f : fs)
                if (auto r = rmse_of(f)) {
                    sum += *r;
                    ++n;
                }
            if (n > 0) score.rmse_consensus = sum / n;
        } else {
            score.rmse_consensus = rmse_of(first);
        }

        auto cv = chart_view.find(key);
        score.viewed_chart_before = cv != chart_view.end() && cv->second <= first->timestamp;
        if (qit->second.resolved()) score.brier = brier_score(*final, qit->second);

        auto& m = out[user];
        m.user_id = user;
        m.questions.push_back(std::move(score));
    }
    return out;
}

std::optional<double> consensus_check_prob(const TokenSequence& seq) {
    int forecasts = 0, checked = 0;
    for (const auto& segment : seq.segments) {
        for (size_t i = 0; i < segment.size(); i += 2) {  // actions at even indices
            if (segment[i].rfind("forecast_create", 0) != 0) continue;
            ++forecasts;
            for (int back = 1; back <= 3; ++back) {
                if (i < 2 * static_cast<size_t>(back)) break;
                if (segment[i - 2 * back].rfind("consensus-chart", 0) == 0) {
                    ++checked;
                    break;
                }
            }
        }
    }
    if (forecasts == 0) return std::nullopt;
    return static_cast<double>(checked) / forecasts;
}

}  // namespace csq
