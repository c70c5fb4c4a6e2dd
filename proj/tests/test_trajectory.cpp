#include <algorithm>
#include <random>
#include <sstream>

#include "csq/trajectory.hpp"
#include "doctest.h"

using namespace csq;

namespace {

ActionRecord rec(long long id, const std::string& user, double t, const std::string& cat,
                 const std::string& sub = "", const std::string& q = "") {
    return ActionRecord{id, user, t, cat, sub, q};
}

}  // namespace

TEST_CASE("action_token canonicalization") {
    CHECK(action_token("Consensus chart", "View") == "consensus-chart_view");
    CHECK(action_token("Forecast", "Create") == "forecast_create");
    CHECK(action_token("News articles", "View") == "news-articles_view");
    CHECK(action_token("Rating", "") == "rating");
    CHECK(action_token("View", "") == "view");
}

TEST_CASE("bin_gap boundaries") {
    CHECK(bin_gap(0.0) == GapBin::T1);
    CHECK(bin_gap(0.5) == GapBin::T1);
    CHECK(bin_gap(1.0) == GapBin::T2);
    CHECK(bin_gap(59.999) == GapBin::T2);
    CHECK(bin_gap(60.0) == GapBin::T3);
    CHECK(bin_gap(88.0) == GapBin::T3);
    CHECK(bin_gap(3599.0) == GapBin::T3);
    CHECK(bin_gap(3600.0) == GapBin::T4);
    CHECK(bin_gap(86399.0) == GapBin::T4);
    CHECK(!bin_gap(86400.0).has_value());
    CHECK(!bin_gap(172800.0).has_value());
    CHECK_THROWS(bin_gap(-1.0));
}

TEST_CASE("parse_timestamp accepts both formats") {
    // 2020-01-06T00:00:00Z
    CHECK(parse_timestamp("2020-01-06T00:00:00") == 1578268800.0);
    CHECK(parse_timestamp("2020-01-06 00:00:00Z") == 1578268800.0);
    CHECK(parse_timestamp("6.1.2020 0:00:00") == 1578268800.0);
    CHECK(parse_timestamp("2020-01-06T00:00:00.5") == doctest::Approx(1578268800.5));
    CHECK_THROWS_AS(parse_timestamp("not a date"), ParseError);
}

TEST_CASE("build_trajectories on the sample activity trail") {
    // Seven actions for one user: minutes-scale gaps around two forecasts.
    double base = parse_timestamp("2023-03-07 09:02:11");
    std::vector<ActionRecord> rs = {
        rec(1, "1234", base - 300, "View", "", ""),
        rec(2, "1234", base, "Consensus chart", "View", "q1599"),
        rec(3, "1234", base + 40, "Forecast", "Create", "q1599"),
        rec(4, "1234", base + 80, "Rating", "", ""),
        rec(5, "1234", base + 85, "View", "", ""),
        rec(6, "1234", base + 90, "News articles", "View", "q1581"),
        rec(7, "1234", base + 90 + 200, "Forecast", "Create", "q1581"),
    };
    std::mt19937 g(3);
    std::shuffle(rs.begin(), rs.end(), g);
    auto seqs = build_trajectories(rs);
    REQUIRE(seqs.size() == 1);
    auto& seq = seqs.at("1234");
    REQUIRE(seq.segments.size() == 1);
    CHECK(format_segment(seq.segments[0]) ==
          "view T[3] consensus-chart_view T[2] forecast_create T[2] rating T[2] view "
          "T[2] news-articles_view T[3] forecast_create");
}

TEST_CASE("single record yields a one-token segment") {
    auto seqs = build_trajectories({rec(1, "u", 1000, "Rating")});
    REQUIRE(seqs.at("u").segments.size() == 1);
    CHECK(seqs.at("u").segments[0] == std::vector<std::string>{"rating"});
}

TEST_CASE("two records two days apart split into two segments") {
    auto seqs = build_trajectories(
        {rec(1, "u", 0, "View"), rec(2, "u", 172800, "Rating")});
    auto& seq = seqs.at("u");
    REQUIRE(seq.segments.size() == 2);
    CHECK(seq.segments[0] == std::vector<std::string>{"view"});
    CHECK(seq.segments[1] == std::vector<std::string>{"rating"});
}

TEST_CASE("timestamp ties break by action_id") {
    auto seqs = build_trajectories(
        {rec(9, "u", 100, "Rating"), rec(2, "u", 100, "View")});
    CHECK(seqs.at("u").segments[0] ==
          std::vector<std::string>{"view", "T[1]", "rating"});
}

TEST_CASE("property: permutation invariance and token count formula") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> gap(0.0, 200000.0);
    const char* cats[] = {"View", "Rating", "Forecast", "News articles"};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ActionRecord> rs;
        double t = 0;
        int n = 1 + int(rng() % 40);
        for (int i = 0; i < n; ++i) {
            t += gap(rng);
            rs.push_back(rec(i + 1, "u", t, cats[rng() % 4]));
        }
        auto base = build_trajectories(rs);
        auto shuffled = rs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto again = build_trajectories(shuffled);
        CHECK(base.at("u").segments == again.at("u").segments);

        long long tokens = 0;
        for (auto& seg : base.at("u").segments) tokens += (long long)seg.size();
        long long segments = (long long)base.at("u").segments.size();
        CHECK(tokens == n + (n - segments));

        // alternation: gap tokens only at odd positions, never at the ends
        for (auto& seg : base.at("u").segments) {
            for (size_t i = 0; i < seg.size(); ++i)
                CHECK(is_gap_token(seg[i]) == (i % 2 == 1));
        }
    }
}

TEST_CASE("trajectory dump round-trips") {
    auto seqs = build_trajectories({
        rec(1, "a", 0, "View"),
        rec(2, "a", 30, "Forecast", "Create", "q1"),
        rec(3, "a", 200000, "Rating"),
        rec(1, "b", 5, "Consensus chart", "View", "q1"),
    });
    std::ostringstream out;
    write_trajectories(out, seqs);
    std::istringstream in(out.str());
    auto back = read_trajectories(in);
    REQUIRE(back.size() == seqs.size());
    for (auto& [user, seq] : seqs) CHECK(back.at(user).segments == seq.segments);
}

TEST_CASE("parse_log CSV") {
    std::istringstream in(
        "action_id,user_id,timestamp,category,subcategory,question_id\n"
        "1,u1,2020-01-06T09:00:00,View,,\n"
        "2,u1,2020-01-06T09:00:30,Forecast,Create,q7\n");
    auto rs = parse_log(in, LogFormat::Csv);
    REQUIRE(rs.size() == 2);
    CHECK(rs[1].question_id == "q7");
    CHECK(rs[1].subcategory == "Create");
    CHECK(rs[1].timestamp - rs[0].timestamp == 30.0);
}

TEST_CASE("parse_log rejects bad input") {
    std::istringstream bad_header("id,user\n1,u\n");
    CHECK_THROWS_AS(parse_log(bad_header, LogFormat::Csv), ParseError);

    std::istringstream dup(
        "action_id,user_id,timestamp,category,subcategory,question_id\n"
        "1,u1,2020-01-06T09:00:00,View,,\n"
        "1,u1,2020-01-06T09:00:30,Rating,,\n");
    CHECK_THROWS_AS(parse_log(dup, LogFormat::Csv), ParseError);
}

TEST_CASE("parse_log JSONL") {
    std::istringstream in(
        R"({"action_id":1,"user_id":"u","timestamp":"2020-01-06T09:00:00","category":"View","subcategory":"","question_id":""})"
        "\n"
        R"({"action_id":2,"user_id":"u","timestamp":"2020-01-06T09:00:02","category":"Rating","subcategory":"","question_id":""})"
        "\n");
    auto rs = parse_log(in, LogFormat::Jsonl);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].category == "View");
}
