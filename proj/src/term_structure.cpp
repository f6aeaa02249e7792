#include "taxhedge/term_structure.hpp"

#include <cmath>
#include <stdexcept>

namespace taxhedge {

namespace {

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be finite");
}

void check_times(double t, double s) {
    require_finite(t, "t");
    require_finite(s, "s");
    if (s < t) throw std::invalid_argument("bond maturity s must not precede valuation time t");
}

} // namespace

void VasicekParams::validate() const {
    require_finite(kappa, "kappa");
    require_finite(theta, "theta");
    require_finite(sigma, "sigma");
    require_finite(r0, "r0");
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
}

VasicekParams VasicekParams::scaled(double factor) const {
    return VasicekParams{kappa, factor * theta, factor * sigma, factor * r0};
}

double vasicek_loading(double kappa, double tau) { return -std::expm1(-kappa * tau) / kappa; }

double vasicek_log_intercept(const VasicekParams& p, double tau) {
    const double b = vasicek_loading(p.kappa, tau);
    const double s2 = p.sigma * p.sigma;
    return (p.theta - s2 / (2.0 * p.kappa * p.kappa)) * (b - tau) - s2 * b * b / (4.0 * p.kappa);
}

double log_bond_price(const VasicekParams& p, double t, double r, double s) {
    const double tau = s - t;
    return vasicek_log_intercept(p, tau) - vasicek_loading(p.kappa, tau) * r;
}

BondQuote bond_price(const VasicekParams& p, double t, double r, double s) {
    check_times(t, s);
    require_finite(r, "r");
    const double tau = s - t;
    const double b = vasicek_loading(p.kappa, tau);
    const double value = std::exp(vasicek_log_intercept(p, tau) - b * r);
    return BondQuote{value, -b * value};
}

BondQuote bond_price_tax_scaled(const VasicekParams& p, double gamma, double t, double r, double s) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
    const double keep = 1.0 - gamma;
    const BondQuote scaled = bond_price(p.scaled(keep), t, keep * r, s);
    // d/dr of F_scaled(t, keep * r, s)
    return BondQuote{scaled.value, keep * scaled.rate_sensitivity};
}

double ou_mean(const VasicekParams& p, double r_start, double h) {
    return p.theta + (r_start - p.theta) * std::exp(-p.kappa * h);
}

double ou_variance(const VasicekParams& p, double h) {
    return p.sigma * p.sigma * (-std::expm1(-2.0 * p.kappa * h)) / (2.0 * p.kappa);
}

double integrated_loading_squared(const VasicekParams& p, double a, double b, double maturity) {
    // With x = maturity - u: int (1 - e^{-k x})^2 / k^2 dx over [maturity - b, maturity - a].
    const double k = p.kappa;
    const double x1 = maturity - b;
    const double x2 = maturity - a;
    const double len = x2 - x1;
    auto exp_integral = [&](double c) {
        // int_{x1}^{x2} e^{-c x} dx
        return std::exp(-c * x1) * (-std::expm1(-c * len)) / c;
    };
    return (len - 2.0 * exp_integral(k) + exp_integral(2.0 * k)) / (k * k);
}

ShortRateStepper::ShortRateStepper(const VasicekParams& p, double h)
    : h_(h), theta_(p.theta), decay_(std::exp(-p.kappa * h)), loading_(vasicek_loading(p.kappa, h)) {
    if (!(h > 0.0)) throw std::invalid_argument("step length must be positive");
    using ld = long double;
    const ld k = p.kappa;
    const ld sg = p.sigma;
    const ld hh = h;
    const ld b1 = -std::expm1(-k * hh) / k;
    const ld b2 = -std::expm1(-2 * k * hh) / (2 * k);
    const ld var_w = hh;
    const ld var_r = sg * sg * b2;
    const ld var_i = sg * sg / (k * k) * (hh - 2 * b1 + b2);
    const ld cov_rw = sg * b1;
    const ld cov_iw = sg * (hh - b1) / k;
    const ld cov_ri = sg * sg * b1 * b1 / 2;

    const ld l11 = std::sqrt(var_w);
    const ld l21 = cov_rw / l11;
    const ld d22 = var_r - l21 * l21;
    const ld l22 = d22 > 0 ? std::sqrt(d22) : 0;
    const ld l31 = cov_iw / l11;
    const ld l32 = l22 > 0 ? (cov_ri - l31 * l21) / l22 : 0;
    const ld d33 = var_i - l31 * l31 - l32 * l32;
    const ld l33 = d33 > 0 ? std::sqrt(d33) : 0;
    l_[0] = static_cast<double>(l11);
    l_[1] = static_cast<double>(l21);
    l_[2] = static_cast<double>(l22);
    l_[3] = static_cast<double>(l31);
    l_[4] = static_cast<double>(l32);
    l_[5] = static_cast<double>(l33);
}

ShortRatePath simulate_short_rate(const VasicekParams& p, std::span<const double> grid, std::mt19937_64& engine) {
    p.validate();
    if (grid.empty()) throw std::invalid_argument("time grid must not be empty");
    if (grid.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
    ShortRatePath path;
    const std::size_t n = grid.size();
    path.rates.resize(n);
    path.accumulated_rate.resize(n);
    path.brownian_increments.resize(n);
    path.rates[0] = p.r0;
    path.accumulated_rate[0] = 0.0;
    path.brownian_increments[0] = 0.0;
    std::normal_distribution<double> normal;

    ShortRateStepper stepper(p, n > 1 && grid[1] > grid[0] ? grid[1] - grid[0] : 1.0);
    for (std::size_t k = 1; k < n; ++k) {
        const double h = grid[k] - grid[k - 1];
        if (!(h > 0.0)) throw std::invalid_argument("time grid must be strictly increasing");
        // uniform grids differ from their nominal step only in the last bits
        if (std::abs(h - stepper.step_length()) > 1e-12 * h) stepper = ShortRateStepper(p, h);
        const auto step = stepper.advance(path.rates[k - 1], engine, normal);
        path.rates[k] = step.rate;
        path.accumulated_rate[k] = path.accumulated_rate[k - 1] + step.integral;
        path.brownian_increments[k] = step.dw;
    }
    return path;
}

ShortRatePath simulate_short_rate(const VasicekParams& p, std::span<const double> grid, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    return simulate_short_rate(p, grid, engine);
}

} // namespace taxhedge
