#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "csq/forecast.hpp"
#include "csq/text.hpp"
#include "csq/trajectory.hpp"

namespace csq {

struct ArchetypeSpec {
    std::string name;
    int count = 1;

    // Behavior loop: every forecast event realizes 0-2 filler actions then
    // the signature template (alternating tokens, last token the forecast
    // action). The signature doubles as the cluster's expected top 5-gram.
    std::vector<std::string> signature_template;
    std::vector<std::string> filler_actions;
    double p_filler = 0.7;

    double p_copy = 0;           // probability a forecast copies the visible consensus
    double slider_jitter = 0;    // +/- percentage-point jitter on copies ("quasi-copy")
    double p_view_chart = 0.3;   // honest users: chart view before forecasting
    double forecast_noise = 5;   // per-option stddev around the latent truth
    double user_bias_sigma = 0;  // per-user systematic offset stddev

    int rationale_words = 30;    // mean rationale length
    double misspell_rate = 0.02;

    std::string signature_kgram() const;
};

struct CopyEvent {
    std::string user_id;
    std::string question_id;
    double timestamp = 0;
};

struct SyntheticDataset {
    std::vector<ActionRecord> records;
    std::vector<Forecast> forecasts;
    std::map<std::string, Question> questions;
    std::vector<Rationale> rationales;
    std::map<std::string, std::string> truth;  // user_id -> archetype name
    std::vector<CopyEvent> copy_events;        // exact copies, rmse-from-consensus 0
};

// Deterministic simulation of weekly HITs (2 new + 3 update forecasts per
// user-week). Consensus visibility obeys the 10-forecast gate; copy events
// duplicate the scorer's own snapshot values exactly.
SyntheticDataset generate(const std::vector<ArchetypeSpec>& specs, int n_questions,
                          std::uint64_t seed);

// The three planted archetypes the acceptance scenarios are built around:
// a consensus copier, a high-noise speeder, a sloppy-rationale skimmer.
std::vector<ArchetypeSpec> default_archetypes(int users_per_archetype = 50);

// Writes logs.csv, forecasts.csv, questions.csv, rationales.csv, truth.csv
// and dictionary.txt into dir.
void write_dataset(const SyntheticDataset& data, const std::filesystem::path& dir);

// The word bank rationales are drawn from; doubles as the test dictionary.
const std::vector<std::string>& synth_word_bank();

}  // namespace csq
