#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csq/trajectory.hpp"

namespace csq {

// Forecast probs live on the 0-100 percentage scale.
struct Forecast {
    std::string user_id;
    std::string question_id;
    double timestamp = 0;
    std::vector<double> probs;
    bool is_update = false;
};

struct Question {
    std::string question_id;
    int option_count = 2;
    double close_time = 0;
    int outcome_index = -1;  // -1 = unresolved

    bool resolved() const { return outcome_index >= 0; }
};

struct ConsensusSnapshot {
    std::string question_id;
    double as_of = 0;
    std::vector<double> values;  // percentage scale
    bool visible = false;        // false until the question has >= 10 forecasts
};

// Mean squared error between the [0,1]-scaled forecast and the one-hot
// outcome, averaged over options.
double brier_score(const Forecast& f, const Question& q);

// For a group of forecasts on one question: sqrt((1/N) sum_j sum_o
// (f_j^o - m^o)^2), N = group size, m = total mean over all forecasts on
// the question (percentage scale).
std::vector<double> question_total_mean(const std::vector<const Forecast*>& all_final);
std::optional<double> rmse_from_mean(const std::vector<const Forecast*>& group,
                                     const std::vector<double>& total_mean);

double rmse_from_consensus(const Forecast& f, const ConsensusSnapshot& c);

// Exponentially weighted mean (percentage scale) of the forecasts strictly
// before as_of, recency-weighted with the given half-life. Shared by the
// scorer and the generator so copies are exact by construction.
ConsensusSnapshot ewm_snapshot(const std::string& question_id,
                               const std::vector<const Forecast*>& prior, double as_of,
                               int option_count, double half_life_days = 7.0);

// Daily consensus snapshots per question, visibility gated at 10 forecasts.
class ConsensusStore {
public:
    static ConsensusStore build(const std::vector<Forecast>& forecasts,
                                const std::map<std::string, Question>& questions,
                                double half_life_days = 7.0);

    // Latest visible snapshot with as_of <= t, or nullptr.
    const ConsensusSnapshot* latest_visible(const std::string& question_id, double t) const;

    const std::map<std::string, std::vector<ConsensusSnapshot>>& snapshots() const {
        return snapshots_;
    }

private:
    std::map<std::string, std::vector<ConsensusSnapshot>> snapshots_;  // sorted by as_of
};

// Per-(user, question) scoring input: the user's first forecast on each
// question, its consensus distance, and chart-view eligibility.
struct QuestionScore {
    std::string question_id;
    std::optional<double> rmse_consensus;  // absent when no visible snapshot
    bool viewed_chart_before = false;      // consensus-chart action with this
                                           // question id at or before the forecast
    std::optional<double> brier;           // absent when unresolved
};

struct UserForecastMetrics {
    std::string user_id;
    std::vector<QuestionScore> questions;

    // Mean of rmse_consensus over questions where it is present (Eq. 5 shape).
    std::optional<double> avg_rmse_consensus() const;
    // Fraction of eligible questions (visible snapshot + prior chart view)
    // with rmse_consensus <= x.
    std::optional<double> copy_paste_prob(double x) const;
    std::optional<double> mean_brier() const;
};

std::map<std::string, UserForecastMetrics> score_users(
    const std::vector<Forecast>& forecasts, const std::map<std::string, Question>& questions,
    const std::vector<ActionRecord>& records, const ConsensusStore& store,
    bool use_updates = false);

// Fraction of forecast_create actions preceded by a consensus-chart view
// within the prior 3 actions of the same segment.
std::optional<double> consensus_check_prob(const TokenSequence& seq);

}  // namespace csq
