// Pipeline driver: synth -> ingest -> cluster -> assess -> report.
// Exit codes: 0 success, 1 input error, 2 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "csq/report.hpp"
#include "csq/synth.hpp"

namespace fs = std::filesystem;
using namespace csq;

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(std::string(what) + ": cannot open '" + path + "'");
    return in;
}

std::vector<ActionRecord> load_logs(const RunConfig& cfg) {
    if (cfg.logs.empty()) throw InputError("missing --logs");
    auto in = open_input(cfg.logs, "logs");
    LogFormat fmt = cfg.logs.size() > 6 && cfg.logs.ends_with(".jsonl") ? LogFormat::Jsonl
                                                                        : LogFormat::Csv;
    auto records = parse_log(in, fmt);
    if (records.empty()) throw InputError("logs: no records in '" + cfg.logs + "'");
    return records;
}

void add_common_options(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "key=value config file; flags override it");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--seed", cfg.seed, "rng seed");
}

// Config file values apply wherever the corresponding flag was not given.
void merge_config_file(RunConfig& cfg, const std::string& config_path, CLI::App* cmd) {
    if (config_path.empty()) return;
    auto in = open_input(config_path, "config");
    RunConfig file = load_config(in);

    auto flag_given = [&](const char* name) {
        auto* opt = cmd->get_option_no_throw(name);
        return opt && opt->count() > 0;
    };
    if (!flag_given("--logs")) cfg.logs = file.logs.empty() ? cfg.logs : file.logs;
    if (!flag_given("--forecasts") && !file.forecasts.empty()) cfg.forecasts = file.forecasts;
    if (!flag_given("--questions") && !file.questions.empty()) cfg.questions = file.questions;
    if (!flag_given("--rationales") && !file.rationales.empty()) cfg.rationales = file.rationales;
    if (!flag_given("--dictionary") && !file.dictionary.empty()) cfg.dictionary = file.dictionary;
    if (!flag_given("--assignment") && !file.assignment.empty()) cfg.assignment = file.assignment;
    if (!flag_given("--out") && file.out_dir != ".") cfg.out_dir = file.out_dir;
    if (!flag_given("--seed")) cfg.seed = file.seed;
    if (!flag_given("--k")) cfg.k = file.k;
    if (!flag_given("--min-support")) cfg.min_user_support = file.min_user_support;
    if (!flag_given("--sparsify")) cfg.sparsify = file.sparsify;
    if (!flag_given("--min-size")) cfg.min_size = file.min_size;
    if (!flag_given("--max-depth")) cfg.max_depth = file.max_depth;
    if (!flag_given("--top-k-super")) cfg.top_k_super = file.top_k_super;
    if (!flag_given("--method")) cfg.method = file.method;
    if (!flag_given("--kmeans-k")) cfg.kmeans_k = file.kmeans_k;
    if (!flag_given("--normalize-kmeans")) cfg.normalize_kmeans = file.normalize_kmeans;
    if (!flag_given("--use-updates")) cfg.use_updates = file.use_updates;
    if (!flag_given("--thresholds")) cfg.thresholds = file.thresholds;
}

int cmd_synth(const RunConfig& cfg, int questions, int users) {
    auto specs = default_archetypes(users);
    auto data = generate(specs, questions, cfg.seed);
    write_dataset(data, cfg.out_dir);
    std::cout << "synth: " << data.truth.size() << " users, " << data.questions.size()
              << " questions, " << data.records.size() << " actions, " << data.forecasts.size()
              << " forecasts -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_ingest(const RunConfig& cfg) {
    auto records = load_logs(cfg);
    auto out = run_ingest(records);
    write_ingest_outputs(out, cfg.out_dir);
    std::cout << "ingest: " << out.record_count << " actions, " << out.trajectories.size()
              << " users -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_cluster(const RunConfig& cfg, bool export_edges, bool export_features) {
    auto records = load_logs(cfg);
    auto trajectories = build_trajectories(std::move(records));
    if (trajectories.size() < 2) throw InputError("cluster: need >= 2 users");
    auto out = run_clustering(trajectories, cfg);
    write_cluster_outputs(out, cfg, cfg.out_dir, export_edges, export_features);
    std::cout << "cluster: " << out.assignment.cluster_count() << " clusters over "
              << out.assignment.users.size() << " users (method " << out.assignment.method;
    if (out.elbow_k) std::cout << ", elbow k=" << *out.elbow_k;
    std::cout << ") -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_assess(const RunConfig& cfg) {
    AssessInputs in;
    in.records = load_logs(cfg);
    in.trajectories = build_trajectories(in.records);

    if (cfg.assignment.empty()) throw InputError("missing --assignment");
    {
        auto f = open_input(cfg.assignment, "assignment");
        in.super_of_user = load_assignment_supers(f);
    }
    if (!cfg.forecasts.empty()) {
        auto f = open_input(cfg.forecasts, "forecasts");
        in.forecasts = load_forecasts(f);
    }
    if (!cfg.questions.empty()) {
        auto f = open_input(cfg.questions, "questions");
        in.questions = load_questions(f);
    }
    if (!cfg.rationales.empty()) {
        auto f = open_input(cfg.rationales, "rationales");
        in.rationales = load_rationales(f);
    }
    if (!cfg.dictionary.empty()) {
        auto f = open_input(cfg.dictionary, "dictionary");
        in.dictionary = Dictionary::load(f);
    }

    auto report = run_assess(in, cfg);
    write_assess_outputs(report, in.super_of_user, in, cfg.out_dir);
    std::cout << "assess: " << report.metrics.size() << " metrics, " << report.tests.size()
              << " cluster-pair tests -> " << cfg.out_dir << "\n";
    for (const auto& note : report.notes) std::cout << "  note: " << note << "\n";
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    std::string text = assemble_report(cfg.out_dir);
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clickstream clustering and crowdworker quality assessment"};
    app.require_subcommand(1);

    RunConfig cfg;
    cfg.out_dir = ".";
    std::string config_path;
    int synth_questions = 60;
    int synth_users = 50;
    bool export_edges = false, export_features = false;

    auto* synth = app.add_subcommand("synth", "generate a planted-archetype dataset");
    add_common_options(synth, cfg, config_path);
    synth->add_option("--questions", synth_questions, "number of questions");
    synth->add_option("--users", synth_users, "users per archetype");

    auto* ingest = app.add_subcommand("ingest", "parse logs into trajectories + action stats");
    add_common_options(ingest, cfg, config_path);
    ingest->add_option("--logs", cfg.logs, "clickstream log file (.csv or .jsonl)");

    auto* cluster = app.add_subcommand("cluster", "features -> graph -> clusters -> profiles");
    add_common_options(cluster, cfg, config_path);
    cluster->add_option("--logs", cfg.logs, "clickstream log file");
    cluster->add_option("--k", cfg.k, "k-gram length");
    cluster->add_option("--min-support", cfg.min_user_support, "vocabulary min user support");
    cluster->add_option("--sparsify", cfg.sparsify, "none | knn:<k>");
    cluster->add_option("--min-size", cfg.min_size, "minimum cluster size per split side");
    cluster->add_option("--max-depth", cfg.max_depth, "maximum divisive split depth");
    cluster->add_option("--top-k-super", cfg.top_k_super, "super cluster count (C1..Ck)");
    cluster->add_option("--method", cfg.method, "divisive | kmeans");
    cluster->add_option("--kmeans-k", cfg.kmeans_k, "auto | <k> (kmeans method only)");
    cluster->add_flag("--normalize-kmeans", cfg.normalize_kmeans, "L2-normalize rows for kmeans");
    cluster->add_flag("--export-edges", export_edges, "also write edges.csv");
    cluster->add_flag("--export-features", export_features, "also write features.csv/vocabulary.csv");

    auto* assess = app.add_subcommand("assess", "score clusters on all quality metrics");
    add_common_options(assess, cfg, config_path);
    assess->add_option("--logs", cfg.logs, "clickstream log file");
    assess->add_option("--assignment", cfg.assignment, "assignment.csv from the cluster step");
    assess->add_option("--forecasts", cfg.forecasts, "forecasts CSV");
    assess->add_option("--questions", cfg.questions, "questions CSV");
    assess->add_option("--rationales", cfg.rationales, "rationales CSV");
    assess->add_option("--dictionary", cfg.dictionary, "newline-delimited wordlist");
    assess->add_option("--k", cfg.k, "k-gram length (baseline features)");
    assess->add_option("--min-support", cfg.min_user_support, "vocabulary min user support");
    std::string thresholds;
    assess->add_option("--thresholds", thresholds, "comma-separated sweep thresholds");
    assess->add_flag("--use-updates", cfg.use_updates, "average updates into consensus metrics");

    auto* report = app.add_subcommand("report", "merge cluster+assess outputs into report.json");
    add_common_options(report, cfg, config_path);

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* active = app.get_subcommands().front();
        merge_config_file(cfg, config_path, active);
        if (!thresholds.empty()) apply_config_entry(cfg, "thresholds", thresholds);

        if (synth->parsed()) return cmd_synth(cfg, synth_questions, synth_users);
        if (ingest->parsed()) return cmd_ingest(cfg);
        if (cluster->parsed()) return cmd_cluster(cfg, export_edges, export_features);
        if (assess->parsed()) return cmd_assess(cfg);
        if (report->parsed()) return cmd_report(cfg);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
