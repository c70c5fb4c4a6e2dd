#include "csq/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "csq/csv.hpp"
#include "json.hpp"

namespace csq {

using ordered_json = nlohmann::ordered_json;

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

Sparsify parse_sparsify(const std::string& text) {
    if (text == "none") return Sparsify::none();
    if (text.rfind("knn:", 0) == 0) {
        int k = std::stoi(text.substr(4));
        if (k < 1) throw std::invalid_argument("sparsify: knn k must be >= 1");
        return Sparsify::knn(k);
    }
    throw std::invalid_argument("sparsify: expected 'none' or 'knn:<k>', got '" + text + "'");
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "logs") cfg.logs = value;
    else if (key == "forecasts") cfg.forecasts = value;
    else if (key == "questions") cfg.questions = value;
    else if (key == "rationales") cfg.rationales = value;
    else if (key == "dictionary") cfg.dictionary = value;
    else if (key == "assignment") cfg.assignment = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "k") cfg.k = std::stoi(value);
    else if (key == "min_user_support") cfg.min_user_support = std::stoi(value);
    else if (key == "sparsify") cfg.sparsify = value;
    else if (key == "min_size") cfg.min_size = std::stoi(value);
    else if (key == "max_depth") cfg.max_depth = std::stoi(value);
    else if (key == "top_k_super") cfg.top_k_super = std::stoi(value);
    else if (key == "method") cfg.method = value;
    else if (key == "kmeans_k") cfg.kmeans_k = value;
    else if (key == "normalize_kmeans") cfg.normalize_kmeans = value == "1" || value == "true";
    else if (key == "use_updates") cfg.use_updates = value == "1" || value == "true";
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "thresholds") {
        cfg.thresholds.clear();
        std::istringstream in(value);
        std::string part;
        double prev = -1;
        while (std::getline(in, part, ',')) {
            double x = std::stod(part);
            if (x < 0 || x < prev)
                throw std::invalid_argument("thresholds must be nonnegative ascending");
            cfg.thresholds.push_back(x);
            prev = x;
        }
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

RunConfig load_config(std::istream& in) {
    RunConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

std::vector<Forecast> load_forecasts(std::istream& in) {
    CsvReader reader(in);
    auto header = reader.next();
    if (!header || header->size() < 5 || (*header)[0] != "user_id" ||
        (*header)[1] != "question_id" || (*header)[2] != "timestamp" ||
        (*header)[3] != "is_update")
        throw ParseError("forecasts: expected header user_id,question_id,timestamp,is_update,p1..");

    std::vector<Forecast> out;
    while (auto row = reader.next()) {
        if (row->size() == 1 && (*row)[0].empty()) continue;
        if (row->size() != header->size())
            throw ParseError("forecasts row " + std::to_string(reader.line()) + ": field count");
        Forecast f;
        f.user_id = (*row)[0];
        f.question_id = (*row)[1];
        f.timestamp = parse_timestamp((*row)[2]);
        f.is_update = (*row)[3] == "1" || (*row)[3] == "true";
        for (size_t i = 4; i < row->size(); ++i) {
            if ((*row)[i].empty()) break;
            f.probs.push_back(std::stod((*row)[i]));
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::map<std::string, Question> load_questions(std::istream& in) {
    CsvReader reader(in);
    auto header = reader.next();
    const std::vector<std::string> expected = {"question_id", "option_count", "close_time",
                                              "outcome_index"};
    if (!header || *header != expected)
        throw ParseError("questions: expected header question_id,option_count,close_time,outcome_index");
    std::map<std::string, Question> out;
    while (auto row = reader.next()) {
        if (row->size() == 1 && (*row)[0].empty()) continue;
        if (row->size() != 4)
            throw ParseError("questions row " + std::to_string(reader.line()) + ": field count");
        Question q;
        q.question_id = (*row)[0];
        q.option_count = std::stoi((*row)[1]);
        q.close_time = parse_timestamp((*row)[2]);
        q.outcome_index = (*row)[3].empty() ? -1 : std::stoi((*row)[3]);
        out.emplace(q.question_id, std::move(q));
    }
    return out;
}

std::vector<Rationale> load_rationales(std::istream& in) {
    CsvReader reader(in);
    auto header = reader.next();
    const std::vector<std::string> expected = {"user_id", "question_id", "text"};
    if (!header || *header != expected)
        throw ParseError("rationales: expected header user_id,question_id,text");
    std::vector<Rationale> out;
    while (auto row = reader.next()) {
        if (row->size() == 1 && (*row)[0].empty()) continue;
        if (row->size() != 3)
            throw ParseError("rationales row " + std::to_string(reader.line()) + ": field count");
        Rationale r;
        r.user_id = (*row)[0];
        r.question_id = (*row)[1];
        r.raw_text = (*row)[2];
        r.text = clean_text(r.raw_text);
        out.push_back(std::move(r));
    }
    return out;
}

std::map<std::string, std::string> load_truth(std::istream& in) {
    CsvReader reader(in);
    auto header = reader.next();
    const std::vector<std::string> expected = {"user_id", "archetype"};
    if (!header || *header != expected)
        throw ParseError("truth: expected header user_id,archetype");
    std::map<std::string, std::string> out;
    while (auto row = reader.next()) {
        if (row->size() == 1 && (*row)[0].empty()) continue;
        out[(*row)[0]] = (*row)[1];
    }
    return out;
}

IngestOutputs run_ingest(const std::vector<ActionRecord>& records) {
    IngestOutputs out;
    out.record_count = records.size();
    out.trajectories = build_trajectories(records);

    std::map<std::string, long long> freq;
    for (const auto& r : records) ++freq[action_token(r.category, r.subcategory)];
    out.action_freq.assign(freq.begin(), freq.end());
    std::stable_sort(out.action_freq.begin(), out.action_freq.end(),
                     [](const auto& a, const auto& b) {
                         if (a.second != b.second) return a.second > b.second;
                         return a.first < b.first;
                     });
    return out;
}

ClusterOutputs run_clustering(const std::map<std::string, TokenSequence>& trajectories,
                              const RunConfig& cfg) {
    if (trajectories.size() < 2)
        throw std::invalid_argument("clustering: need >= 2 users");

    ClusterOutputs out;
    std::vector<KGramCounts> per_user;
    std::vector<std::string> users;
    for (const auto& [user, seq] : trajectories) {
        users.push_back(user);
        per_user.push_back(extract_kgrams(seq, cfg.k));
    }
    out.vocab = build_vocabulary(per_user, cfg.min_user_support);

    std::vector<FeatureVector> all_vectors;
    for (size_t i = 0; i < users.size(); ++i)
        all_vectors.push_back(vectorize(users[i], per_user[i], out.vocab));

    if (cfg.method == "kmeans") {
        int k;
        if (cfg.kmeans_k == "auto") {
            auto elbow = elbow_select(all_vectors, out.vocab.size(),
                                      std::min<int>(10, static_cast<int>(all_vectors.size())),
                                      cfg.seed);
            k = elbow.k;
            out.elbow_k = elbow.k;
            out.elbow_flat_warning = elbow.flat_curve_warning;
        } else {
            k = std::stoi(cfg.kmeans_k);
        }
        out.vectors = all_vectors;
        out.assignment = kmeans_baseline(all_vectors, out.vocab.size(), k, cfg.seed,
                                         cfg.normalize_kmeans);
    } else if (cfg.method == "divisive") {
        auto built = build_similarity_graph(all_vectors, parse_sparsify(cfg.sparsify));
        out.zero_users = built.excluded_users;
        // keep vectors aligned with the graph's node order
        std::map<std::string, const FeatureVector*> by_user;
        for (const auto& v : all_vectors) by_user[v.user_id] = &v;
        for (const auto& user : built.graph.users) out.vectors.push_back(*by_user[user]);
        out.assignment = divisive_cluster(built.graph, cfg.min_size, cfg.max_depth);
    } else {
        throw std::invalid_argument("clustering: unknown method '" + cfg.method + "'");
    }

    out.super_clusters = make_super_cluster(out.assignment, cfg.top_k_super);
    if (out.vectors.empty()) out.vectors = all_vectors;

    int n_clusters = out.assignment.cluster_count();
    for (int c = 0; c < n_clusters; ++c)
        out.profiles.push_back(
            characterize_cluster(out.vectors, out.assignment.labels, out.vocab, c, 10));
    return out;
}

namespace {

std::map<int, std::vector<double>> rmse_mean_distributions(
    const std::vector<Forecast>& forecasts, const std::map<std::string, Question>& questions,
    const std::map<std::string, int>& cluster_of) {
    // final forecast per (question, user)
    std::map<std::string, std::map<std::string, const Forecast*>> final_by_q;
    for (const auto& f : forecasts) {
        auto& slot = final_by_q[f.question_id][f.user_id];
        if (!slot || f.timestamp >= slot->timestamp) slot = &f;
    }
    std::map<int, std::vector<double>> out;
    for (const auto& [qid, by_user] : final_by_q) {
        if (!questions.count(qid)) continue;
        std::vector<const Forecast*> all;
        for (const auto& [_, f] : by_user) all.push_back(f);
        auto mean = question_total_mean(all);
        std::map<int, std::vector<const Forecast*>> groups;
        for (const auto& [user, f] : by_user) {
            auto it = cluster_of.find(user);
            if (it != cluster_of.end()) groups[it->second].push_back(f);
        }
        for (const auto& [c, group] : groups)
            if (auto v = rmse_from_mean(group, mean)) out[c].push_back(*v);
    }
    return out;
}

void add_pair_tests(QualityReport& report, const MetricSummary& metric) {
    std::vector<int> clusters;
    for (const auto& [c, _] : metric.values) clusters.push_back(c);
    for (size_t i = 0; i < clusters.size(); ++i)
        for (size_t j = i + 1; j < clusters.size(); ++j) {
            QualityReport::PairTest t;
            t.metric = metric.name;
            t.a = clusters[i];
            t.b = clusters[j];
            const auto& sa = metric.values.at(t.a);
            const auto& sb = metric.values.at(t.b);
            t.welch = welch_t(sa, sb);
            t.levene = levene(sa, sb);
            report.tests.push_back(std::move(t));
        }
}

}  // namespace

QualityReport run_assess(const AssessInputs& in, const RunConfig& cfg) {
    QualityReport report;
    report.thresholds = cfg.thresholds;

    std::set<int> clusters;
    for (const auto& [_, c] : in.super_of_user) clusters.insert(c);

    auto add_metric = [&](const std::string& name,
                          const std::map<std::string, double>& per_user) {
        MetricSummary m;
        m.name = name;
        for (const auto& [user, value] : per_user) {
            auto it = in.super_of_user.find(user);
            if (it != in.super_of_user.end()) m.values[it->second].push_back(value);
        }
        report.metrics.push_back(std::move(m));
    };

    const bool have_forecasts = !in.forecasts.empty() && !in.questions.empty();
    std::map<std::string, UserForecastMetrics> user_metrics;
    if (have_forecasts) {
        auto store = ConsensusStore::build(in.forecasts, in.questions);
        user_metrics = score_users(in.forecasts, in.questions, in.records, store, cfg.use_updates);

        // Scenario 1: dispersion from the final mean, per (cluster, question)
        MetricSummary disp;
        disp.name = "rmse_from_mean";
        disp.values = rmse_mean_distributions(in.forecasts, in.questions, in.super_of_user);
        report.metrics.push_back(std::move(disp));

        std::map<std::string, double> avg_rmse, copy0, brier;
        for (const auto& [user, m] : user_metrics) {
            if (auto v = m.avg_rmse_consensus()) avg_rmse[user] = *v;
            if (auto v = m.copy_paste_prob(0)) copy0[user] = *v;
            if (auto v = m.mean_brier()) brier[user] = *v;
        }
        add_metric("avg_rmse_consensus", avg_rmse);
        add_metric("copy_paste_prob_0", copy0);
        add_metric("mean_brier", brier);

        // Fig. 6 analogue: per-cluster mean of copy_paste_prob over the sweep
        for (int c : clusters) report.sweep[c] = {};
        for (double x : cfg.thresholds) {
            std::map<int, std::pair<double, int>> acc;
            for (const auto& [user, m] : user_metrics) {
                auto it = in.super_of_user.find(user);
                if (it == in.super_of_user.end()) continue;
                if (auto v = m.copy_paste_prob(x)) {
                    acc[it->second].first += *v;
                    ++acc[it->second].second;
                }
            }
            for (int c : clusters) {
                auto it = acc.find(c);
                report.sweep[c].push_back(it == acc.end() || it->second.second == 0
                                              ? 0.0
                                              : it->second.first / it->second.second);
            }
        }
    } else {
        report.notes.push_back("forecast metrics unavailable: missing forecasts or questions input");
    }

    {
        std::map<std::string, double> check;
        for (const auto& [user, seq] : in.trajectories)
            if (auto v = consensus_check_prob(seq)) check[user] = *v;
        add_metric("consensus_check_prob", check);
    }

    if (!in.rationales.empty()) {
        std::map<std::string, std::vector<const Rationale*>> by_user;
        for (const auto& r : in.rationales) by_user[r.user_id].push_back(&r);
        std::map<std::string, double> words, misspell, ari, cli;
        for (const auto& [user, rs] : by_user) {
            double w_sum = 0, m_sum = 0, a_sum = 0, c_sum = 0;
            int w_n = 0, m_n = 0, a_n = 0, c_n = 0;
            for (auto* r : rs) {
                TextStats s = text_stats(r->text);
                w_sum += static_cast<double>(s.wo);
                ++w_n;
                if (auto v = cli_score(s)) {
                    c_sum += *v;
                    ++c_n;
                }
                if (auto v = ari_score(s)) {
                    a_sum += *v;
                    ++a_n;
                }
                if (in.dictionary)
                    if (auto v = misspell_rate(r->text, *in.dictionary)) {
                        m_sum += *v;
                        ++m_n;
                    }
            }
            if (w_n) words[user] = w_sum / w_n;
            if (c_n) cli[user] = c_sum / c_n;
            if (a_n) ari[user] = a_sum / a_n;
            if (m_n) misspell[user] = m_sum / m_n;
        }
        add_metric("rationale_words", words);
        if (in.dictionary)
            add_metric("misspell_rate", misspell);
        else
            report.notes.push_back("misspell_rate unavailable: missing dictionary input");
        add_metric("ari", ari);
        add_metric("cli", cli);
    } else {
        report.notes.push_back("text metrics unavailable: missing rationales input");
    }

    for (const auto& m : report.metrics) add_pair_tests(report, m);

    // k-means + elbow baseline on the same features; the cross-check asserts
    // that no single baseline cluster is worst in all three scenarios
    if (have_forecasts && !in.rationales.empty() && in.dictionary &&
        in.trajectories.size() >= 4) {
        RunConfig base_cfg = cfg;
        base_cfg.method = "kmeans";
        base_cfg.kmeans_k = "auto";
        auto base = run_clustering(in.trajectories, base_cfg);
        report.baseline_ran = true;
        report.baseline_k = base.assignment.cluster_count();
        report.baseline_sizes = base.assignment.cluster_sizes();

        std::map<std::string, int> base_of;
        for (size_t i = 0; i < base.assignment.users.size(); ++i)
            base_of[base.assignment.users[i]] = base.assignment.labels[i];

        auto mean_of = [](const std::vector<double>& xs) {
            double s = 0;
            for (double x : xs) s += x;
            return xs.empty() ? 0.0 : s / xs.size();
        };
        auto worst_by = [&](const std::map<int, std::vector<double>>& dist) {
            int worst = -1;
            double worst_mean = -1;
            for (const auto& [c, xs] : dist) {
                double m = mean_of(xs);
                if (m > worst_mean) {
                    worst_mean = m;
                    worst = c;
                }
            }
            return worst;
        };

        auto s1 = rmse_mean_distributions(in.forecasts, in.questions, base_of);

        std::map<int, std::vector<double>> s2;
        for (const auto& [user, m] : user_metrics)
            if (auto v = m.copy_paste_prob(0)) {
                auto it = base_of.find(user);
                if (it != base_of.end()) s2[it->second].push_back(*v);
            }

        std::map<int, std::vector<double>> s3;
        {
            std::map<std::string, std::pair<double, int>> per_user;
            for (const auto& r : in.rationales)
                if (auto v = misspell_rate(r.text, *in.dictionary)) {
                    per_user[r.user_id].first += *v;
                    ++per_user[r.user_id].second;
                }
            for (const auto& [user, acc] : per_user) {
                auto it = base_of.find(user);
                if (it != base_of.end()) s3[it->second].push_back(acc.first / acc.second);
            }
        }

        report.baseline_worst["dispersion"] = worst_by(s1);
        report.baseline_worst["copy_paste"] = worst_by(s2);
        report.baseline_worst["rationale"] = worst_by(s3);
        int w1 = report.baseline_worst["dispersion"];
        int w2 = report.baseline_worst["copy_paste"];
        int w3 = report.baseline_worst["rationale"];
        report.baseline_no_dominant_cluster = !(w1 == w2 && w2 == w3 && w1 >= 0);
    }
    return report;
}

void write_ingest_outputs(const IngestOutputs& out, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream traj;
    write_trajectories(traj, out.trajectories);
    atomic_write_file(dir / "trajectories.txt", traj.str());

    std::string freq = "token,count\n";
    for (const auto& [token, count] : out.action_freq)
        freq += csv_join({token, std::to_string(count)}) + "\n";
    atomic_write_file(dir / "action_freq.csv", freq);
}

void write_assignment(const ClusterOutputs& out, const std::filesystem::path& file) {
    std::string body = "user_id,cluster_id,super_cluster\n";
    for (size_t i = 0; i < out.assignment.users.size(); ++i)
        body += csv_join({out.assignment.users[i], std::to_string(out.assignment.labels[i]),
                          "C" + std::to_string(out.super_clusters.labels[i])}) +
                "\n";
    atomic_write_file(file, body);
}

std::map<std::string, int> load_assignment_supers(std::istream& in) {
    CsvReader reader(in);
    auto header = reader.next();
    const std::vector<std::string> expected = {"user_id", "cluster_id", "super_cluster"};
    if (!header || *header != expected)
        throw ParseError("assignment: expected header user_id,cluster_id,super_cluster");
    std::map<std::string, int> out;
    while (auto row = reader.next()) {
        if (row->size() == 1 && (*row)[0].empty()) continue;
        if (row->size() != 3) throw ParseError("assignment row: field count");
        std::string super = (*row)[2];
        if (super.empty() || super[0] != 'C') throw ParseError("assignment: bad super cluster");
        out[(*row)[0]] = std::stoi(super.substr(1));
    }
    return out;
}

void write_cluster_outputs(const ClusterOutputs& out, const RunConfig& cfg,
                           const std::filesystem::path& dir, bool export_edges,
                           bool export_features) {
    std::filesystem::create_directories(dir);
    write_assignment(out, dir / "assignment.csv");

    std::string prof = "cluster_id,size,rank,kgram,chi2\n";
    for (const auto& p : out.profiles)
        for (size_t r = 0; r < p.top_features.size(); ++r)
            prof += csv_join({std::to_string(p.cluster_id), std::to_string(p.size),
                              std::to_string(r + 1), p.top_features[r].first,
                              format_g(p.top_features[r].second)}) +
                    "\n";
    atomic_write_file(dir / "profiles.csv", prof);

    ordered_json meta;
    meta["method"] = out.assignment.method;
    meta["k"] = cfg.k;
    meta["min_user_support"] = cfg.min_user_support;
    meta["sparsify"] = cfg.sparsify;
    meta["seed"] = cfg.seed;
    meta["cluster_count"] = out.assignment.cluster_count();
    meta["cluster_sizes"] = out.assignment.cluster_sizes();
    meta["vocabulary_size"] = out.vocab.size();
    meta["zero_vector_users"] = out.zero_users;
    if (out.elbow_k) meta["elbow_k"] = *out.elbow_k;
    if (out.elbow_flat_warning) meta["elbow_flat_curve_warning"] = true;
    if (out.super_clusters.c4_empty_warning)
        meta["warning"] = "fewer base clusters than top_k_super; C4 is empty";
    meta["super_cluster_base_ids"] = out.super_clusters.base_of;
    atomic_write_file(dir / "cluster.json", meta.dump(2) + "\n");

    if (export_features) {
        std::string feats = "user_id,kgram,count\n";
        for (const auto& v : out.vectors)
            for (const auto& [idx, c] : v.counts)
                feats += csv_join({v.user_id, out.vocab.grams[idx], std::to_string(c)}) + "\n";
        atomic_write_file(dir / "features.csv", feats);

        std::string vocab = "index,kgram\n";
        for (int i = 0; i < out.vocab.size(); ++i)
            vocab += csv_join({std::to_string(i), out.vocab.grams[i]}) + "\n";
        atomic_write_file(dir / "vocabulary.csv", vocab);
    }

    if (export_edges && out.assignment.method == "divisive") {
        auto built = build_similarity_graph(out.vectors, parse_sparsify(cfg.sparsify));
        std::string edges = "user_a,user_b,distance,similarity\n";
        const auto& g = built.graph;
        for (int i = 0; i < g.size(); ++i)
            for (int j = i + 1; j < g.size(); ++j)
                if (g.edge[i][j])
                    edges += csv_join({g.users[i], g.users[j], format_g(1.0 - g.sim[i][j]),
                                       format_g(g.sim[i][j])}) +
                             "\n";
        atomic_write_file(dir / "edges.csv", edges);
    }
}

namespace {

ordered_json metric_table(const MetricSummary& m) {
    ordered_json rows = ordered_json::array();
    for (const auto& [cluster, xs] : m.values) {
        ordered_json row;
        row["cluster"] = "C" + std::to_string(cluster);
        row["n"] = xs.size();
        double mean = 0;
        for (double x : xs) mean += x;
        mean = xs.empty() ? 0 : mean / xs.size();
        double sd = 0;
        if (xs.size() > 1) {
            for (double x : xs) sd += (x - mean) * (x - mean);
            sd = std::sqrt(sd / (xs.size() - 1));
        }
        row["mean"] = format_g(mean);
        row["stddev"] = format_g(sd);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void write_assess_outputs(const QualityReport& report,
                          const std::map<std::string, int>& super_of_user,
                          const AssessInputs& in, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    // long-format distributions for external plotting
    std::string dist = "metric,cluster,value\n";
    for (const auto& m : report.metrics)
        for (const auto& [cluster, xs] : m.values)
            for (double x : xs)
                dist += csv_join({m.name, "C" + std::to_string(cluster), format_g(x)}) + "\n";
    atomic_write_file(dir / "distributions.csv", dist);

    std::string tests = "metric,cluster_a,cluster_b,test,statistic,dof,p\n";
    for (const auto& t : report.tests) {
        auto row = [&](const char* name, const std::optional<TestResult>& r) {
            if (r)
                tests += csv_join({t.metric, "C" + std::to_string(t.a), "C" + std::to_string(t.b),
                                   name, format_g(r->statistic), format_g(r->dof),
                                   format_g(r->p_value)}) +
                         "\n";
            else
                tests += csv_join({t.metric, "C" + std::to_string(t.a), "C" + std::to_string(t.b),
                                   name, "", "", ""}) +
                         "\n";
        };
        row("welch", t.welch);
        row("levene", t.levene);
    }
    atomic_write_file(dir / "tests.csv", tests);

    std::string sweep = "cluster,x,mean_prob\n";
    for (const auto& [cluster, means] : report.sweep)
        for (size_t i = 0; i < means.size(); ++i)
            sweep += csv_join({"C" + std::to_string(cluster), format_g(report.thresholds[i]),
                               format_g(means[i])}) +
                     "\n";
    atomic_write_file(dir / "sweep.csv", sweep);

    ordered_json j;
    j["clusters"] = ordered_json::object();
    {
        std::map<int, int> sizes;
        for (const auto& [_, c] : super_of_user) ++sizes[c];
        for (const auto& [c, n] : sizes) j["clusters"]["C" + std::to_string(c)] = n;
    }
    j["metrics"] = ordered_json::object();
    for (const auto& m : report.metrics) j["metrics"][m.name] = metric_table(m);
    j["thresholds"] = report.thresholds;
    j["sweep"] = ordered_json::object();
    for (const auto& [cluster, means] : report.sweep) {
        ordered_json xs = ordered_json::array();
        for (double v : means) xs.push_back(format_g(v));
        j["sweep"]["C" + std::to_string(cluster)] = std::move(xs);
    }
    if (report.baseline_ran) {
        ordered_json b;
        b["k"] = report.baseline_k;
        b["sizes"] = report.baseline_sizes;
        for (const auto& [scenario, worst] : report.baseline_worst)
            b["worst"][scenario] = worst;
        b["no_dominant_cluster"] = report.baseline_no_dominant_cluster;
        j["baseline"] = std::move(b);
    }
    j["notes"] = report.notes;
    atomic_write_file(dir / "assess.json", j.dump(2) + "\n");
    (void)in;
}

std::string assemble_report(const std::filesystem::path& dir) {
    ordered_json j;
    auto read_json = [&](const char* name) -> ordered_json {
        std::ifstream in(dir / name);
        if (!in) return ordered_json();
        return ordered_json::parse(in, nullptr, true);
    };
    ordered_json cluster = read_json("cluster.json");
    if (!cluster.is_null()) j["clustering"] = cluster;

    std::ifstream prof(dir / "profiles.csv");
    if (prof) {
        ordered_json profiles = ordered_json::array();
        CsvReader reader(prof);
        reader.next();  // header
        while (auto row = reader.next()) {
            if (row->size() != 5) continue;
            ordered_json p;
            p["cluster_id"] = std::stoi((*row)[0]);
            p["size"] = std::stoi((*row)[1]);
            p["rank"] = std::stoi((*row)[2]);
            p["kgram"] = (*row)[3];
            p["chi2"] = (*row)[4];
            profiles.push_back(std::move(p));
        }
        j["profiles"] = std::move(profiles);
    }

    ordered_json assess = read_json("assess.json");
    if (!assess.is_null()) j["assessment"] = assess;

    std::string text = j.dump(2) + "\n";
    atomic_write_file(dir / "report.json", text);
    return text;
}

}  // namespace csq
