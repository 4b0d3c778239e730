#pragma once

#include <cstddef>
#include <vector>

namespace comet::stats {

double mean(const std::vector<double>& x);

// Population standard deviation (divide by n, not n-1).
double population_sd(const std::vector<double>& x);

struct PearsonResult {
    double r = 0.0;
    double t = 0.0;        // t statistic on n-2 degrees of freedom
    double p_value = 1.0;  // two-sided
    std::size_t n = 0;
};

// Throws ZeroVariance when either series is constant, DimensionMismatch when
// lengths differ or n < 3.
PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value for a t statistic with df degrees of freedom.
double t_test_p_value(double t, double df);

double log_gamma(double x);

} // namespace comet::stats
