#include "csq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace csq {

double sample_mean(std::span<const double> xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    double m = sample_mean(xs);
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    double qab = a + b, qap = a + 1, qam = a - 1;
    double c = 1, d = 1 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1) < kEps) break;
    }
    return h;
}

}  // namespace

double reg_incomplete_beta(double a, double b, double x) {
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1) / (a + b + 2)) return front * betacf(a, b, x) / a;
    return 1 - front * betacf(b, a, 1 - x) / b;
}

double student_t_sf(double t, double dof) {
    if (t == 0) return 0.5;
    double x = dof / (dof + t * t);
    double tail = 0.5 * reg_incomplete_beta(dof / 2, 0.5, x);
    return t > 0 ? tail : 1 - tail;
}

double f_sf(double f, double dof1, double dof2) {
    if (f <= 0) return 1;
    double x = dof2 / (dof2 + dof1 * f);
    return reg_incomplete_beta(dof2 / 2, dof1 / 2, x);
}

std::optional<TestResult> welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) return std::nullopt;
    double va = sample_variance(a), vb = sample_variance(b);
    if (va == 0 || vb == 0) return std::nullopt;
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());

    double se2 = va / na + vb / nb;
    TestResult r;
    r.test = "welch";
    r.statistic = (sample_mean(a) - sample_mean(b)) / std::sqrt(se2);
    r.dof = se2 * se2 / ((va / na) * (va / na) / (na - 1) + (vb / nb) * (vb / nb) / (nb - 1));
    r.p_value = 2 * student_t_sf(std::abs(r.statistic), r.dof);
    r.p_value = std::min(r.p_value, 1.0);
    return r;
}

std::optional<TestResult> levene(std::span<const double> a, std::span<const double> b,
                                 LeveneCenter center) {
    if (a.size() < 2 || b.size() < 2) return std::nullopt;
    if (sample_variance(a) == 0 || sample_variance(b) == 0) return std::nullopt;

    auto center_of = [&](std::span<const double> xs) {
        if (center == LeveneCenter::Mean) return sample_mean(xs);
        std::vector<double> sorted(xs.begin(), xs.end());
        std::sort(sorted.begin(), sorted.end());
        size_t n = sorted.size();
        return n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2;
    };

    auto deviations = [&](std::span<const double> xs) {
        double c = center_of(xs);
        std::vector<double> z(xs.size());
        for (size_t i = 0; i < xs.size(); ++i) z[i] = std::abs(xs[i] - c);
        return z;
    };
    std::vector<double> za = deviations(a), zb = deviations(b);

    double na = static_cast<double>(za.size()), nb = static_cast<double>(zb.size());
    double n = na + nb;
    double ma = sample_mean(za), mb = sample_mean(zb);
    double grand = (na * ma + nb * mb) / n;

    double between = na * (ma - grand) * (ma - grand) + nb * (mb - grand) * (mb - grand);
    double within = 0;
    for (double z : za) within += (z - ma) * (z - ma);
    for (double z : zb) within += (z - mb) * (z - mb);

    TestResult r;
    r.test = "levene";
    r.dof = n - 2;  // denominator dof; numerator dof is 1 for two groups
    if (within == 0) {
        if (between == 0) {
            r.statistic = 0;
            r.p_value = 1;
            return r;
        }
        r.statistic = std::numeric_limits<double>::infinity();
        r.p_value = 0;
        return r;
    }
    r.statistic = (n - 2) / 1.0 * between / within;
    r.p_value = between == 0 ? 1.0 : f_sf(r.statistic, 1, n - 2);
    return r;
}

}  // namespace csq
