#include "taxhedge/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace taxhedge {

double pairwise_sum(std::span<const double> xs) {
    constexpr std::size_t block = 32;
    if (xs.size() <= block) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double Estimate::z_score(double target) const {
    if (std_error == 0.0) return mean == target ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(mean - target) / std_error;
}

Estimate estimate_mean(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("a standard error needs at least two samples");
    const double n = static_cast<double>(xs.size());
    const double mean = pairwise_sum(xs) / n;
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
    const double var = pairwise_sum(sq) / (n - 1.0);
    return Estimate{mean, std::sqrt(var / n), xs.size()};
}

Estimate estimate_covariance(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("covariance needs paired samples");
    if (xs.size() < 2) throw std::invalid_argument("a standard error needs at least two samples");
    const double n = static_cast<double>(xs.size());
    const double mx = pairwise_sum(xs) / n;
    const double my = pairwise_sum(ys) / n;
    std::vector<double> prod(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) prod[i] = (xs[i] - mx) * (ys[i] - my);
    return estimate_mean(prod);
}

Estimate estimate_difference(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("difference needs paired samples");
    std::vector<double> d(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) d[i] = xs[i] - ys[i];
    return estimate_mean(d);
}

double combined_error(const Estimate& a, const Estimate& b) {
    return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

} // namespace taxhedge
