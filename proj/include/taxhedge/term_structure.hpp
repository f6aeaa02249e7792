#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace taxhedge {

// Vasicek short rate dr = kappa (theta - r) dt + sigma dW under Q.
// sigma = 0 is accepted as a deterministic-rate test mode.
struct VasicekParams {
    double kappa = 0.1;
    double theta = 0.03;
    double sigma = 0.01;
    double r0 = 0.02;

    void validate() const;

    // Parameters of the scaled process (1 - gamma) r, which is again Vasicek.
    VasicekParams scaled(double factor) const;

    bool operator==(const VasicekParams&) const = default;
};

struct BondQuote {
    double value = 1.0;
    double rate_sensitivity = 0.0;  // d value / d r
};

// B(tau) = (1 - exp(-kappa tau)) / kappa.
double vasicek_loading(double kappa, double tau);
// A(tau) such that F = exp(A - B r).
double vasicek_log_intercept(const VasicekParams& p, double tau);

double log_bond_price(const VasicekParams& p, double t, double r, double s);

// Zero-coupon bond price F(t, r, s) = E[exp(-int_t^s r) | r(t) = r].
BondQuote bond_price(const VasicekParams& p, double t, double r, double s);

// F^{1-gamma}(t, r, s) = E[exp(-(1 - gamma) int_t^s r) | r(t) = r].
BondQuote bond_price_tax_scaled(const VasicekParams& p, double gamma, double t, double r, double s);

double ou_mean(const VasicekParams& p, double r_start, double h);
double ou_variance(const VasicekParams& p, double h);

// int_a^b B(T - u)^2 du, the integrated squared bond volatility loading.
double integrated_loading_squared(const VasicekParams& p, double a, double b, double maturity);

// Exact joint transition of (W, r, int r) over a step of length h.
class ShortRateStepper {
public:
    struct Step {
        double rate = 0.0;
        double integral = 0.0;  // int over the step of r(u) du
        double dw = 0.0;        // Brownian increment driving the step
    };

    ShortRateStepper(const VasicekParams& p, double h);

    double step_length() const { return h_; }

    template <class Engine>
    Step advance(double r, Engine& engine, std::normal_distribution<double>& normal) const {
        const double z1 = normal(engine);
        const double z2 = normal(engine);
        const double z3 = normal(engine);
        Step out;
        out.dw = l_[0] * z1;
        out.rate = theta_ + (r - theta_) * decay_ + l_[1] * z1 + l_[2] * z2;
        out.integral = theta_ * h_ + (r - theta_) * loading_ + l_[3] * z1 + l_[4] * z2 + l_[5] * z3;
        return out;
    }

private:
    double h_;
    double theta_;
    double decay_;
    double loading_;
    // lower Cholesky factor of Cov(W, r, I), row-major without zeros
    double l_[6];
};

struct ShortRatePath {
    std::vector<double> rates;
    std::vector<double> accumulated_rate;      // int_0^{t_k} r
    std::vector<double> brownian_increments;   // W(t_k) - W(t_{k-1}); first entry 0
};

ShortRatePath simulate_short_rate(const VasicekParams& p, std::span<const double> grid, std::uint64_t seed);
ShortRatePath simulate_short_rate(const VasicekParams& p, std::span<const double> grid, std::mt19937_64& engine);

} // namespace taxhedge
