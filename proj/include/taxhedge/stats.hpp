#pragma once

#include <span>

namespace taxhedge {

// Pairwise (cascade) summation; the split points depend only on the length.
double pairwise_sum(std::span<const double> xs);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;

    // |mean - target| in units of the standard error
    double z_score(double target = 0.0) const;
};

// Sample mean and standard error of the mean (n - 1 denominator); n >= 2.
Estimate estimate_mean(std::span<const double> xs);

// Mean of x * y centred at the sample means, with its standard error.
Estimate estimate_covariance(std::span<const double> xs, std::span<const double> ys);

// Mean of x - y on paired samples.
Estimate estimate_difference(std::span<const double> xs, std::span<const double> ys);

// sqrt(a.se^2 + b.se^2)
double combined_error(const Estimate& a, const Estimate& b);

} // namespace taxhedge
