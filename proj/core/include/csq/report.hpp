#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csq/clustering.hpp"
#include "csq/forecast.hpp"
#include "csq/stats.hpp"
#include "csq/text.hpp"
#include "csq/trajectory.hpp"

namespace csq {

struct RunConfig {
    std::string logs, forecasts, questions, rationales, dictionary;
    std::string assignment;  // path to a previously written assignment.csv
    std::string out_dir = ".";

    int k = 5;
    int min_user_support = 2;
    std::string sparsify = "none";  // "none" | "knn:<k>"
    int min_size = 1;
    int max_depth = 20;
    int top_k_super = 3;
    std::string method = "divisive";  // "divisive" | "kmeans"
    std::string kmeans_k = "auto";    // "auto" | integer
    bool normalize_kmeans = false;
    bool use_updates = false;
    std::vector<double> thresholds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::uint64_t seed = 42;
};

// key=value lines; '#' comments; unknown keys rejected.
RunConfig load_config(std::istream& in);
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

Sparsify parse_sparsify(const std::string& text);

// ---- file loaders (schemas per write_dataset) ----
std::vector<Forecast> load_forecasts(std::istream& in);
std::map<std::string, Question> load_questions(std::istream& in);
std::vector<Rationale> load_rationales(std::istream& in);
std::map<std::string, std::string> load_truth(std::istream& in);

// ---- pipeline stages ----
struct IngestOutputs {
    std::map<std::string, TokenSequence> trajectories;
    std::vector<std::pair<std::string, long long>> action_freq;  // token -> count, desc
    size_t record_count = 0;
};
IngestOutputs run_ingest(const std::vector<ActionRecord>& records);

struct ClusterOutputs {
    Vocabulary vocab;
    std::vector<FeatureVector> vectors;      // users with nonzero vectors, graph order
    std::vector<std::string> zero_users;
    ClusterAssignment assignment;
    SuperClusterAssignment super_clusters;
    std::vector<ClusterProfile> profiles;    // one per base cluster
    std::optional<int> elbow_k;              // set when method=kmeans, k=auto
    bool elbow_flat_warning = false;
};
ClusterOutputs run_clustering(const std::map<std::string, TokenSequence>& trajectories,
                              const RunConfig& cfg);

struct MetricSummary {
    std::string name;
    std::map<int, std::vector<double>> values;  // super cluster -> sample
};

struct QualityReport {
    std::vector<MetricSummary> metrics;
    // metric -> (cluster_a, cluster_b) -> welch/levene results
    struct PairTest {
        std::string metric;
        int a = 0, b = 0;
        std::optional<TestResult> welch;
        std::optional<TestResult> levene;
    };
    std::vector<PairTest> tests;
    // threshold sweep: cluster -> per-x mean copy_paste_prob
    std::map<int, std::vector<double>> sweep;
    std::vector<double> thresholds;
    // k-means baseline cross-check
    int baseline_k = 0;
    std::vector<int> baseline_sizes;
    std::map<std::string, int> baseline_worst;  // scenario -> worst cluster id
    bool baseline_no_dominant_cluster = false;
    bool baseline_ran = false;
    std::vector<std::string> notes;  // degraded inputs, warnings
};

struct AssessInputs {
    std::vector<ActionRecord> records;
    std::map<std::string, TokenSequence> trajectories;
    std::vector<Forecast> forecasts;            // may be empty (degraded)
    std::map<std::string, Question> questions;  // may be empty
    std::vector<Rationale> rationales;          // may be empty
    std::optional<Dictionary> dictionary;
    std::map<std::string, int> super_of_user;   // user -> super cluster label
};

QualityReport run_assess(const AssessInputs& in, const RunConfig& cfg);

// ---- serialization ----
void write_ingest_outputs(const IngestOutputs& out, const std::filesystem::path& dir);
void write_cluster_outputs(const ClusterOutputs& out, const RunConfig& cfg,
                           const std::filesystem::path& dir, bool export_edges,
                           bool export_features);
void write_assess_outputs(const QualityReport& report,
                          const std::map<std::string, int>& super_of_user,
                          const AssessInputs& in, const std::filesystem::path& dir);

// assignment.csv round-trip: user_id,cluster_id,super_cluster
void write_assignment(const ClusterOutputs& out, const std::filesystem::path& file);
std::map<std::string, int> load_assignment_supers(std::istream& in);

// Merge cluster + assess outputs in dir into report.json; returns the JSON text.
std::string assemble_report(const std::filesystem::path& dir);

void atomic_write_file(const std::filesystem::path& path, const std::string& content);
std::string format_g(double v);  // fixed %.12g float formatting for reports

}  // namespace csq
