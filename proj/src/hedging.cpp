#include "taxhedge/hedging.hpp"

#include "taxhedge/term_structure.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <algorithm>
#include <stdexcept>

namespace taxhedge {

void NumericsConfig::validate() const {
    if (quad_intervals < 2) throw std::invalid_argument("quadrature needs at least two sub-intervals");
    if (ode_substeps < 1) throw std::invalid_argument("ode_substeps must be positive");
    if (chebyshev_nodes < 4) throw std::invalid_argument("chebyshev_nodes must be at least 4");
}

CashflowProfile::CashflowProfile(const ContractSpec& spec, double t, const NumericsConfig& cfg)
    : t_(t), n_(spec.n_states()) {
    const double horizon = spec.horizon();
    if (!std::isfinite(t) || t < 0.0 || t > horizon) throw std::invalid_argument("t must lie in [0, T]");
    if (t == horizon) return;
    const std::vector<double> cuts = spec.breakpoints(t, horizon);
    nodes_ = simpson_plan(t, horizon, cuts, cfg.quad_intervals);
    const std::vector<double> xs = plan_abscissae(nodes_);
    const std::vector<Eigen::MatrixXd> p =
        deflated_transitions_sweep(spec.markov, spec.tax_expense.expense_deflation(), t, xs, cfg.ode_substeps);

    y_.assign(nodes_.size() * n_, 0.0);
    std::vector<double> c(n_);
    std::size_t x = 0;
    for (std::size_t q = 0; q < nodes_.size(); ++q) {
        while (xs[x] != nodes_[q].s) ++x;
        for (std::size_t j = 0; j < n_; ++j)
            c[j] = payment_rate(spec.markov, spec.payments, j, nodes_[q].s, nodes_[q].side);
        for (std::size_t i = 0; i < n_; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n_; ++j)
                acc += p[x](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * c[j];
            y_[q * n_ + i] = acc;
        }
    }
}

StateValues value_states(const ContractSpec& spec, const CashflowProfile& profile, double r) {
    const std::size_t n = profile.n_states();
    StateValues out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    const auto nodes = profile.nodes();
    if (nodes.empty()) return out;
    const double t = profile.time();
    const double gamma = spec.tax_expense.gamma;
    const BondQuote at_maturity = bond_price(spec.vasicek, t, r, spec.horizon());
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const BondQuote f = bond_price(spec.vasicek, t, r, nodes[q].s);
        const BondQuote g = bond_price_tax_scaled(spec.vasicek, gamma, t, r, nodes[q].s);
        const double w_value = nodes[q].weight * g.value;
        const double w_units =
            nodes[q].weight * (f.rate_sensitivity / at_maturity.rate_sensitivity) * (g.value / f.value);
        for (std::size_t i = 0; i < n; ++i) {
            const double y = profile.y(q, i);
            out.reserves[i] += w_value * y;
            out.bond_units[i] += w_units * y;
        }
    }
    return out;
}

double reserve(const ContractSpec& spec, std::size_t state, double t, double r, const NumericsConfig& cfg) {
    cfg.validate();
    if (state >= spec.n_states()) throw std::out_of_range("state index out of range");
    if (t > spec.horizon()) throw std::invalid_argument("t must not exceed the horizon");
    const CashflowProfile profile(spec, t, cfg);
    return value_states(spec, profile, r).reserves[state];
}

StrategyPoint strategy_from_values(const StateValues& values, std::size_t state_pre, std::size_t state_now,
                                   double savings, double bond) {
    StrategyPoint p;
    p.h1 = values.bond_units[state_pre];
    p.value = values.reserves[state_now];
    p.h0 = (p.value - p.h1 * bond) / savings;
    return p;
}

StrategyPoint optimal_strategy(const ContractSpec& spec, std::size_t state_pre, std::size_t state_now, double t,
                               double r, double accumulated_rate, const NumericsConfig& cfg) {
    cfg.validate();
    if (state_pre >= spec.n_states() || state_now >= spec.n_states())
        throw std::out_of_range("state index out of range");
    if (t > spec.horizon() || t < 0.0) throw std::invalid_argument("t must lie in [0, T]");
    if (t == spec.horizon()) return StrategyPoint{};
    const CashflowProfile profile(spec, t, cfg);
    const StateValues values = value_states(spec, profile, r);
    const double bond = bond_price(spec.vasicek, t, r, spec.horizon()).value;
    return strategy_from_values(values, state_pre, state_now, std::exp(accumulated_rate), bond);
}

GKWIntegrands gkw_from_values(const ContractSpec& spec, const StateValues& values, double t,
                              double accumulated_rate, double accumulated_expense) {
    const double gamma = spec.tax_expense.gamma;
    const std::size_t n = spec.n_states();
    GKWIntegrands out;
    out.xi.resize(n);
    const double growth = std::exp(gamma * accumulated_rate + accumulated_expense);
    for (std::size_t i = 0; i < n; ++i) out.xi[i] = (1.0 - gamma) * growth * values.bond_units[i];
    const double discount = std::exp(-((1.0 - gamma) * accumulated_rate - accumulated_expense));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
            if (!spec.markov.has_transition(j, k)) continue;
            const double b = spec.payments.transition_payment(j, k)(t);
            out.v.push_back(
                TransitionIntegrand{j, k, discount * (b + values.reserves[k] - values.reserves[j])});
        }
    return out;
}

GKWIntegrands gkw_integrands(const ContractSpec& spec, double t, double r, double accumulated_rate,
                             double accumulated_expense, const NumericsConfig& cfg) {
    cfg.validate();
    const CashflowProfile profile(spec, t, cfg);
    return gkw_from_values(spec, value_states(spec, profile, r), t, accumulated_rate, accumulated_expense);
}

ReserveCurve reserve_curve(const ContractSpec& spec, std::span<const double> times, std::span<const double> rates,
                           const NumericsConfig& cfg, Execution exec) {
    cfg.validate();
    if (times.size() != rates.size()) throw std::invalid_argument("one rate per reporting time is required");
    ReserveCurve curve{{times.begin(), times.end()}, {rates.begin(), rates.end()}, {}, cfg};
    curve.values.resize(times.size());
    const auto count = static_cast<long>(times.size());
    auto body = [&](long k) {
        const CashflowProfile profile(spec, times[static_cast<std::size_t>(k)], cfg);
        curve.values[static_cast<std::size_t>(k)] =
            value_states(spec, profile, rates[static_cast<std::size_t>(k)]).reserves;
    };
    if (exec == Execution::serial) {
        for (long k = 0; k < count; ++k) body(k);
    } else {
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
        for (long k = 0; k < count; ++k) body(k);
    }
    return curve;
}

namespace {

double clenshaw(const double* a, std::size_t m, double x) {
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t j = m; j-- > 1;) {
        const double b0 = 2.0 * x * b1 - b2 + a[j];
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + 0.5 * a[0];
}

} // namespace

HedgeSurface::HedgeSurface(const ContractSpec& spec, std::span<const double> times, const NumericsConfig& cfg,
                           Execution exec)
    : spec_(spec), times_(times.begin(), times.end()), n_(spec.n_states()), m_(cfg.chebyshev_nodes) {
    cfg.validate();
    const VasicekParams& v = spec.vasicek;
    const double spread = v.sigma / std::sqrt(2.0 * v.kappa);
    centre_ = 0.5 * (v.r0 + v.theta);
    half_width_ = std::max(0.5 * std::abs(v.r0 - v.theta) + 12.0 * spread, 0.05);

    profiles_.reserve(times_.size());
    for (double t : times_) {
        if (t < 0.0 || t > spec.horizon()) throw std::invalid_argument("surface times must lie in [0, T]");
    }
    std::vector<std::optional<CashflowProfile>> built(times_.size());
    coeffs_.assign(times_.size() * n_ * 2 * m_, 0.0);
    std::vector<double> cos_table(m_ * m_);
    for (std::size_t j = 0; j < m_; ++j)
        for (std::size_t i = 0; i < m_; ++i)
            cos_table[j * m_ + i] =
                std::cos(std::numbers::pi * static_cast<double>(j) * (static_cast<double>(i) + 0.5) /
                         static_cast<double>(m_));

    const auto count = static_cast<long>(times_.size());
    auto body = [&](long kk) {
        const auto k = static_cast<std::size_t>(kk);
        built[k].emplace(spec_, times_[k], cfg);
        std::vector<double> fv(m_ * n_), fu(m_ * n_);
        for (std::size_t i = 0; i < m_; ++i) {
            const double x = cos_table[m_ + i];  // cos(pi (i + 1/2) / m)
            const StateValues sv = value_states(spec_, *built[k], centre_ + half_width_ * x);
            for (std::size_t s = 0; s < n_; ++s) {
                fv[i * n_ + s] = sv.reserves[s];
                fu[i * n_ + s] = sv.bond_units[s];
            }
        }
        const double scale = 2.0 / static_cast<double>(m_);
        for (std::size_t s = 0; s < n_; ++s) {
            double* cv = &coeffs_[((k * n_ + s) * 2 + 0) * m_];
            double* cu = &coeffs_[((k * n_ + s) * 2 + 1) * m_];
            for (std::size_t j = 0; j < m_; ++j) {
                double av = 0.0, au = 0.0;
                for (std::size_t i = 0; i < m_; ++i) {
                    av += fv[i * n_ + s] * cos_table[j * m_ + i];
                    au += fu[i * n_ + s] * cos_table[j * m_ + i];
                }
                cv[j] = scale * av;
                cu[j] = scale * au;
            }
        }
    };
    if (exec == Execution::serial) {
        for (long k = 0; k < count; ++k) body(k);
    } else {
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
        for (long k = 0; k < count; ++k) body(k);
    }
    for (auto& p : built) profiles_.push_back(std::move(*p));
}

void HedgeSurface::evaluate(std::size_t k, double r, double* reserves, double* bond_units) const {
    const double x = (r - centre_) / half_width_;
    if (!(std::abs(x) <= 1.0)) {
        const StateValues sv = value_states(spec_, profiles_[k], r);
        for (std::size_t s = 0; s < n_; ++s) {
            reserves[s] = sv.reserves[s];
            bond_units[s] = sv.bond_units[s];
        }
        return;
    }
    for (std::size_t s = 0; s < n_; ++s) {
        reserves[s] = clenshaw(&coeffs_[((k * n_ + s) * 2 + 0) * m_], m_, x);
        bond_units[s] = clenshaw(&coeffs_[((k * n_ + s) * 2 + 1) * m_], m_, x);
    }
}

StateValues HedgeSurface::evaluate(std::size_t k, double r) const {
    StateValues sv{std::vector<double>(n_), std::vector<double>(n_)};
    evaluate(k, r, sv.reserves.data(), sv.bond_units.data());
    return sv;
}

} // namespace taxhedge
