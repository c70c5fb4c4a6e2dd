#pragma once

#include <optional>
#include <span>
#include <string>

namespace csq {

struct TestResult {
    double statistic = 0;
    double dof = 0;       // Welch-Satterthwaite dof, or denominator dof for Levene
    double p_value = 1;
    std::string test;     // "welch" | "levene"
};

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double reg_incomplete_beta(double a, double b, double x);

// Two-sided survival helpers.
double student_t_sf(double t, double dof);          // P(T >= t)
double f_sf(double f, double dof1, double dof2);    // P(F >= f)

enum class LeveneCenter { Mean, Median };

// Returns nullopt (with no side effects) when a sample has < 2 points or
// zero variance.
std::optional<TestResult> welch_t(std::span<const double> a, std::span<const double> b);
std::optional<TestResult> levene(std::span<const double> a, std::span<const double> b,
                                 LeveneCenter center = LeveneCenter::Mean);

double sample_mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // unbiased, n-1

}  // namespace csq
