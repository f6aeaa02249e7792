#pragma once

// Independent reference implementation of the classic (untaxed) quantities:
// bond prices in the long-rate form, transition probabilities from matrix
// exponentials over constant pieces, and the textbook risk-minimizing holdings.

#include "taxhedge/contract.hpp"
#include "taxhedge/quadrature.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using namespace taxhedge;

inline double loading(double kappa, double tau) { return (1.0 - std::exp(-kappa * tau)) / kappa; }

inline double bond(const VasicekParams& p, double tau, double r) {
    const double b = loading(p.kappa, tau);
    const double r_inf = p.theta - p.sigma * p.sigma / (2.0 * p.kappa * p.kappa);
    return std::exp(-r_inf * tau + (r_inf - r) * b - p.sigma * p.sigma * b * b / (4.0 * p.kappa));
}

inline double bond_dr(const VasicekParams& p, double tau, double r) { return -loading(p.kappa, tau) * bond(p, tau, r); }

inline double side_value(const PiecewiseConstant& f, double s, Side side) {
    return side == Side::left ? f.left_limit(s) : f(s);
}

// exp(int_t^s (mu - diag rates)) for piecewise-constant coefficients, the
// product of matrix exponentials over constant pieces.
inline Eigen::MatrixXd expm_step(const MarkovModel& m, const std::vector<PiecewiseConstant>& rates, double a, double b) {
    const auto n = static_cast<Eigen::Index>(m.n_states());
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    if (b <= a) return p;
    std::vector<double> cuts = m.breakpoints(a, b);
    for (const auto& f : rates) f.collect_breakpoints(a, b, cuts);
    cuts.push_back(a);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            double out = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (k == j) continue;
                g(j, k) = m.intensity(static_cast<std::size_t>(j), static_cast<std::size_t>(k))(mid);
                out += g(j, k);
            }
            g(j, j) = -out - (rates.empty() ? 0.0 : rates[static_cast<std::size_t>(j)](mid));
        }
        const Eigen::MatrixXd step = (g * (cuts[i + 1] - cuts[i])).exp();
        p = p * step;
    }
    return p;
}

struct ClassicValues {
    std::vector<double> reserves;
    std::vector<double> bond_units;
};

inline ClassicValues classic_values(const ContractSpec& c, double t, double r, std::size_t intervals) {
    const std::size_t n = c.n_states();
    ClassicValues out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    const double horizon = c.horizon();
    if (t >= horizon) return out;
    const std::vector<QuadratureNode> plan = simpson_plan(t, horizon, c.breakpoints(t, horizon), intervals);
    const double dr_maturity = bond_dr(c.vasicek, horizon - t, r);
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    double prev = t;
    for (const QuadratureNode& node : plan) {
        if (node.s != prev) {
            p = p * expm_step(c.markov, {}, prev, node.s);
            prev = node.s;
        }
        std::vector<double> rate(n);
        for (std::size_t j = 0; j < n; ++j) {
            rate[j] = side_value(c.payments.sojourn[j], node.s, node.side);
            for (std::size_t k = 0; k < n; ++k)
                if (k != j)
                    rate[j] += side_value(c.markov.intensity(j, k), node.s, node.side) *
                               side_value(c.payments.transition_payment(j, k), node.s, node.side);
        }
        const double tau = node.s - t;
        const double f = bond(c.vasicek, tau, r);
        const double ratio = bond_dr(c.vasicek, tau, r) / dr_maturity;
        for (std::size_t i = 0; i < n; ++i) {
            double y = 0.0;
            for (std::size_t j = 0; j < n; ++j) y += p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * rate[j];
            out.reserves[i] += node.weight * f * y;
            out.bond_units[i] += node.weight * ratio * y;
        }
    }
    return out;
}

} // namespace oracle
