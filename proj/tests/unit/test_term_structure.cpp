#include "taxhedge/term_structure.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace taxhedge;

namespace {

struct McResult {
    double mean;
    double se;
};

// exp(-scale int_0^T r) over OU paths: exact transition for r, trapezoid rule for the integral.
McResult mc_discount(const VasicekParams& p, double horizon, double scale, std::size_t paths, std::size_t steps,
                     std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> n01;
    const double h = horizon / static_cast<double>(steps);
    const double decay = std::exp(-p.kappa * h);
    const double sd = p.sigma * std::sqrt((1.0 - decay * decay) / (2.0 * p.kappa));
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
        double r = p.r0, integral = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            const double next = p.theta + (r - p.theta) * decay + sd * n01(eng);
            integral += 0.5 * h * (r + next);
            r = next;
        }
        const double x = std::exp(-scale * integral);
        sum += x;
        sumsq += x * x;
    }
    const double m = sum / static_cast<double>(paths);
    const double var = (sumsq / static_cast<double>(paths) - m * m) * static_cast<double>(paths) / static_cast<double>(paths - 1);
    return {m, std::sqrt(var / static_cast<double>(paths))};
}

} // namespace

TEST_CASE("zero-horizon bond is worth one") {
    const VasicekParams p{0.3, 0.04, 0.02, 0.01};
    const BondQuote q = bond_price(p, 2.0, 0.03, 2.0);
    CHECK(q.value == 1.0);
    CHECK(q.rate_sensitivity == 0.0);
    CHECK(bond_price_tax_scaled(p, 0.4, 2.0, 0.03, 2.0).value == 1.0);
}

TEST_CASE("flat deterministic rate") {
    const VasicekParams p{0.5, 0.02, 0.0, 0.02};
    CHECK(bond_price(p, 0.0, 0.02, 5.0).value == doctest::Approx(std::exp(-0.10)).epsilon(1e-14));
}

TEST_CASE("bond price errors") {
    const VasicekParams p;
    CHECK_THROWS_AS(bond_price(p, 3.0, 0.02, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(bond_price(p, 0.0, NAN, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(bond_price_tax_scaled(p, 1.0, 0.0, 0.02, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(bond_price_tax_scaled(p, -0.1, 0.0, 0.02, 2.0), std::invalid_argument);
    CHECK_THROWS_AS((VasicekParams{0.0, 0.03, 0.01, 0.02}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((VasicekParams{0.1, 0.03, -0.01, 0.02}.validate()), std::invalid_argument);
}

TEST_CASE("gamma zero collapses the tax scaling") {
    const VasicekParams p{0.1, 0.03, 0.01, 0.02};
    for (double t : {0.0, 1.3, 4.0})
        for (double r : {-0.02, 0.0, 0.05})
            for (double s : {4.0, 7.5, 10.0}) {
                const BondQuote a = bond_price(p, t, r, s);
                const BondQuote b = bond_price_tax_scaled(p, 0.0, t, r, s);
                CHECK(std::abs(a.value - b.value) <= 1e-14 * a.value);
                CHECK(std::abs(a.rate_sensitivity - b.rate_sensitivity) <= 1e-14 * std::abs(a.rate_sensitivity) + 1e-300);
            }
}

TEST_CASE("tax-scaled sensitivity identity and finite differences") {
    const VasicekParams p{0.1, 0.03, 0.01, 0.02};
    for (double gamma : {0.0, 0.1, 0.153, 0.5, 0.9})
        for (double t : {0.0, 2.0, 5.0})
            for (double r : {-0.01, 0.02, 0.08})
                for (double s : {5.5, 8.0, 10.0}) {
                    const BondQuote f = bond_price(p, t, r, s);
                    const BondQuote g = bond_price_tax_scaled(p, gamma, t, r, s);
                    const double rhs = (1.0 - gamma) * f.rate_sensitivity * g.value / f.value;
                    CHECK(std::abs(g.rate_sensitivity - rhs) <= 1e-12 * std::abs(rhs));
                    const double h = 1e-6;
                    const double fd = (bond_price_tax_scaled(p, gamma, t, r + h, s).value -
                                       bond_price_tax_scaled(p, gamma, t, r - h, s).value) / (2.0 * h);
                    CHECK(std::abs(fd - g.rate_sensitivity) <= 1e-6 * std::abs(g.rate_sensitivity));
                }
}

TEST_CASE("bond price positive and nonincreasing in maturity for nonnegative rates") {
    const VasicekParams p{0.1, 0.03, 0.01, 0.02};
    for (double r : {0.0, 0.02, 0.1}) {
        double prev = 1.0;
        for (int k = 1; k <= 80; ++k) {
            const double v = bond_price(p, 0.0, r, 0.5 * k).value;
            CHECK(v > 0.0);
            CHECK(v <= prev);
            CHECK(bond_price(p, 0.0, r, 0.5 * k).rate_sensitivity <= 0.0);
            prev = v;
        }
    }
}

TEST_CASE("bond prices match a Monte Carlo oracle") {
    const VasicekParams p{0.1, 0.03, 0.01, 0.02};
    const McResult plain = mc_discount(p, 5.0, 1.0, 1000000, 50, 11);
    CHECK(std::abs(plain.mean - bond_price(p, 0.0, 0.02, 5.0).value) <= 3.0 * plain.se);
    const McResult taxed = mc_discount(p, 5.0, 1.0 - 0.153, 1000000, 50, 12);
    CHECK(std::abs(taxed.mean - bond_price_tax_scaled(p, 0.153, 0.0, 0.02, 5.0).value) <= 3.0 * taxed.se);
}

TEST_CASE("integrated squared loading matches numerical integration") {
    const VasicekParams p{0.2, 0.03, 0.01, 0.02};
    const double a = 1.0, b = 4.0, T = 10.0;
    const int n = 20000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = a + (b - a) * (i + 0.5) / n;
        const double bl = vasicek_loading(p.kappa, T - u);
        acc += bl * bl;
    }
    acc *= (b - a) / n;
    CHECK(integrated_loading_squared(p, a, b, T) == doctest::Approx(acc).epsilon(1e-8));
}

TEST_CASE("short-rate simulation") {
    SUBCASE("degenerate process stays at theta") {
        const VasicekParams p{0.3, 0.04, 0.0, 0.04};
        const std::vector<double> grid{0.0, 0.5, 1.0, 3.0};
        const ShortRatePath path = simulate_short_rate(p, grid, 5);
        for (double r : path.rates) CHECK(r == doctest::Approx(0.04).epsilon(1e-15));
        CHECK(path.accumulated_rate.back() == doctest::Approx(0.12).epsilon(1e-14));
    }
    SUBCASE("deterministic per seed") {
        const VasicekParams p;
        std::vector<double> grid;
        for (int k = 0; k <= 100; ++k) grid.push_back(0.1 * k);
        const ShortRatePath a = simulate_short_rate(p, grid, 42);
        const ShortRatePath b = simulate_short_rate(p, grid, 42);
        CHECK(a.rates == b.rates);
        CHECK(a.accumulated_rate == b.accumulated_rate);
        CHECK(a.brownian_increments == b.brownian_increments);
    }
    SUBCASE("rejects bad grids") {
        const VasicekParams p;
        CHECK_THROWS_AS(simulate_short_rate(p, std::vector<double>{}, 1), std::invalid_argument);
        CHECK_THROWS_AS(simulate_short_rate(p, std::vector<double>{0.0, 1.0, 1.0}, 1), std::invalid_argument);
        CHECK_THROWS_AS(simulate_short_rate(p, std::vector<double>{0.5, 1.0}, 1), std::invalid_argument);
    }
    SUBCASE("one-step moments over independent seeds") {
        const VasicekParams p{0.1, 0.03, 0.01, 0.02};
        const std::vector<double> grid{0.0, 1.0};
        const std::size_t n = 1000000;
        std::mt19937_64 eng(7);
        double s = 0.0, s2 = 0.0, w = 0.0, w2 = 0.0, rw = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const ShortRatePath path = simulate_short_rate(p, grid, eng);
            const double r = path.rates[1];
            const double dw = path.brownian_increments[1];
            s += r;
            s2 += r * r;
            w += dw;
            w2 += dw * dw;
            rw += (r - ou_mean(p, 0.02, 1.0)) * dw;
        }
        const double dn = static_cast<double>(n);
        const double mean = s / dn;
        const double var = s2 / dn - mean * mean;
        CHECK(std::abs(mean - (0.03 + (0.02 - 0.03) * std::exp(-0.1))) <= 3.0 * std::sqrt(var / dn));
        CHECK(std::abs(mean - 0.0209516) < 2e-5);
        const double v_exact = ou_variance(p, 1.0);
        // sample variance standard error ~ v sqrt(2/n)
        CHECK(std::abs(var - v_exact) <= 3.0 * v_exact * std::sqrt(2.0 / dn));
        // Brownian increments are consistent with the rate: Cov(r, W) = sigma (1 - e^{-kappa}) / kappa
        const double cov_exact = p.sigma * (1.0 - std::exp(-0.1)) / 0.1;
        CHECK(std::abs(rw / dn - cov_exact) <= 3.0 * std::sqrt((v_exact + cov_exact * cov_exact) / dn));
        CHECK(std::abs(w / dn) <= 3.0 / std::sqrt(dn));
        CHECK(std::abs(w2 / dn - 1.0) <= 3.0 * std::sqrt(2.0 / dn));
    }
}
