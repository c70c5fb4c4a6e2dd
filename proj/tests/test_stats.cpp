#include <cmath>
#include <random>
#include <vector>

#include "csq/stats.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace csq;

TEST_CASE("descriptives") {
    std::vector<double> xs = {1, 2, 3, 4};
    CHECK(sample_mean(xs) == doctest::Approx(2.5));
    CHECK(sample_variance(xs) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("welch_t frozen worked example") {
    std::vector<double> a = {1, 2, 3}, b = {2, 4, 6};
    auto r = welch_t(a, b);
    REQUIRE(r.has_value());
    CHECK(r->test == "welch");
    CHECK(r->statistic == doctest::Approx(-1.5491933384829668).epsilon(1e-12));
    CHECK(r->dof == doctest::Approx(50.0 / 17.0).epsilon(1e-12));
    // independent oracle: two-sided p by numerical integration of the t density
    double p = 2.0 * oracle::t_sf_numeric(std::fabs(r->statistic), r->dof);
    CHECK(r->p_value == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("welch_t symmetry and identical samples") {
    std::vector<double> a = {1, 2, 3, 4}, b = {0, 2, 5, 9};
    auto ab = welch_t(a, b);
    auto ba = welch_t(b, a);
    REQUIRE(ab.has_value());
    REQUIRE(ba.has_value());
    CHECK(ab->statistic == doctest::Approx(-ba->statistic).epsilon(1e-12));
    CHECK(ab->p_value == doctest::Approx(ba->p_value).epsilon(1e-12));

    auto same = welch_t(a, a);
    REQUIRE(same.has_value());
    CHECK(same->statistic == 0.0);
    CHECK(same->p_value == 1.0);
}

TEST_CASE("welch_t degenerate samples are absent") {
    std::vector<double> one = {1.0}, flat = {3, 3, 3}, ok = {1, 2, 3};
    CHECK(!welch_t(one, ok).has_value());
    CHECK(!welch_t(ok, one).has_value());
    CHECK(!welch_t(flat, ok).has_value());
}

TEST_CASE("welch_t shift invariance") {
    std::vector<double> a = {1, 5, 2, 8}, b = {0, 3, 3, 4, 9};
    auto base = welch_t(a, b);
    std::vector<double> a2 = a, b2 = b;
    for (auto& x : a2) x += 100;
    for (auto& x : b2) x += 100;
    auto shifted = welch_t(a2, b2);
    REQUIRE(base.has_value());
    REQUIRE(shifted.has_value());
    CHECK(base->statistic == doctest::Approx(shifted->statistic).epsilon(1e-9));
    CHECK(base->p_value == doctest::Approx(shifted->p_value).epsilon(1e-9));
}

namespace {

// Independent plain ANOVA-on-absolute-deviations implementation of Levene.
double levene_f_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    auto center = [](const std::vector<double>& xs) {
        double s = 0;
        for (double x : xs) s += x;
        return s / xs.size();
    };
    std::vector<double> za, zb;
    double ca = center(a), cb = center(b);
    for (double x : a) za.push_back(std::fabs(x - ca));
    for (double x : b) zb.push_back(std::fabs(x - cb));
    double mza = center(za), mzb = center(zb);
    double n = double(za.size() + zb.size());
    double grand = (mza * za.size() + mzb * zb.size()) / n;
    double between = za.size() * (mza - grand) * (mza - grand) +
                     zb.size() * (mzb - grand) * (mzb - grand);
    double within = 0;
    for (double z : za) within += (z - mza) * (z - mza);
    for (double z : zb) within += (z - mzb) * (z - mzb);
    return (between / (2 - 1)) / (within / (n - 2));
}

}  // namespace

TEST_CASE("levene against the brute-force ANOVA oracle") {
    std::vector<double> a = {0, 0, 10, 10}, b = {4, 5, 5, 6};
    auto r = levene(a, b);
    REQUIRE(r.has_value());
    CHECK(r->test == "levene");
    CHECK(r->statistic == doctest::Approx(levene_f_oracle(a, b)).epsilon(1e-12));
    CHECK(r->dof == doctest::Approx(6.0).epsilon(1e-12));
    double p = oracle::f_sf_numeric(r->statistic, 1.0, 6.0);
    CHECK(r->p_value == doctest::Approx(p).epsilon(1e-8));
}

TEST_CASE("levene identical samples and pure location shift give p=1") {
    std::vector<double> a = {1, 4, 2, 8};
    auto same = levene(a, a);
    REQUIRE(same.has_value());
    CHECK(same->statistic == 0.0);
    CHECK(same->p_value == 1.0);

    std::vector<double> b = a;
    for (auto& x : b) x += 42;
    auto shifted = levene(a, b);
    REQUIRE(shifted.has_value());
    CHECK(shifted->statistic == doctest::Approx(0.0));
    CHECK(shifted->p_value == doctest::Approx(1.0));
}

TEST_CASE("levene median center differs from mean center on skewed data") {
    std::vector<double> a = {0, 0, 0, 100}, b = {5, 6, 7, 8};
    auto mean_c = levene(a, b, LeveneCenter::Mean);
    auto med_c = levene(a, b, LeveneCenter::Median);
    REQUIRE(mean_c.has_value());
    REQUIRE(med_c.has_value());
    CHECK(mean_c->statistic != doctest::Approx(med_c->statistic));
}

TEST_CASE("survival functions at the origin are exact") {
    CHECK(student_t_sf(0.0, 5.0) == 0.5);
    CHECK(student_t_sf(0.0, 2.9411764705882355) == 0.5);
    CHECK(f_sf(0.0, 1.0, 6.0) == 1.0);
}

TEST_CASE("p-values match numerical integration on a grid") {
    // t distribution
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> tval(-4.0, 4.0), tdof(1.5, 60.0);
    for (int i = 0; i < 25; ++i) {
        double t = tval(rng), v = tdof(rng);
        CHECK(student_t_sf(t, v) ==
              doctest::Approx(oracle::t_sf_numeric(t, v)).epsilon(1e-6));
    }
    // F distribution
    std::uniform_real_distribution<double> fval(0.05, 8.0), fdof(2.0, 80.0);
    for (int i = 0; i < 25; ++i) {
        double f = fval(rng), d2 = fdof(rng);
        CHECK(f_sf(f, 1.0, d2) ==
              doctest::Approx(oracle::f_sf_numeric(f, 1.0, d2)).epsilon(1e-6));
    }
}

TEST_CASE("reg_incomplete_beta endpoints and symmetry") {
    CHECK(reg_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(reg_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    CHECK(reg_incomplete_beta(2.0, 3.0, 0.4) ==
          doctest::Approx(1.0 - reg_incomplete_beta(3.0, 2.0, 0.6)).epsilon(1e-12));
    // I_x(1,1) = x
    CHECK(reg_incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
}
