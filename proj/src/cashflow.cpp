#include "taxhedge/cashflow.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace taxhedge {

namespace {

double one_sided(const PiecewiseConstant& f, double s, Side side) {
    return side == Side::left ? f.left_limit(s) : f(s);
}

} // namespace

PaymentSpec PaymentSpec::zero(std::size_t n_states) {
    PaymentSpec p;
    p.sojourn.resize(n_states);
    p.transition.resize(n_states * n_states);
    return p;
}

PaymentSpec PaymentSpec::scaled(double factor) const {
    PaymentSpec out;
    out.initial_premium = factor * initial_premium;
    for (const auto& f : sojourn) out.sojourn.push_back(f.scaled(factor));
    for (const auto& f : transition) out.transition.push_back(f.scaled(factor));
    return out;
}

void PaymentSpec::collect_breakpoints(double a, double b, std::vector<double>& out) const {
    for (const auto& f : sojourn) f.collect_breakpoints(a, b, out);
    for (const auto& f : transition) f.collect_breakpoints(a, b, out);
}

void PaymentSpec::validate(std::size_t n) const {
    if (sojourn.size() != n) throw std::invalid_argument("sojourn payments must have one entry per state");
    if (transition.size() != n * n) throw std::invalid_argument("transition payments must be an n x n table");
    if (!std::isfinite(initial_premium)) throw std::invalid_argument("initial premium must be finite");
}

TaxExpenseSpec TaxExpenseSpec::none(std::size_t n_states) {
    TaxExpenseSpec t;
    t.expense_rates.resize(n_states);
    return t;
}

DeflationSpec TaxExpenseSpec::expense_deflation() const {
    return DeflationSpec{expense_rates}.negated();
}

void TaxExpenseSpec::validate(std::size_t n) const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
    if (expense_rates.size() != n) throw std::invalid_argument("expense rates must have one entry per state");
}

double payment_rate(const MarkovModel& model, const PaymentSpec& payments, std::size_t state, double s, Side side) {
    double rate = one_sided(payments.sojourn[state], s, side);
    for (std::size_t k = 0; k < model.n_states(); ++k) {
        if (k == state) continue;
        const double b = one_sided(payments.transition_payment(state, k), s, side);
        if (b != 0.0) rate += one_sided(model.intensity(state, k), s, side) * b;
    }
    return rate;
}

double expected_modified_cashflow(const MarkovModel& model, const PaymentSpec& payments,
                                  const TaxExpenseSpec& taxexp, std::size_t i, double t, double s,
                                  std::size_t steps) {
    if (i >= model.n_states()) throw std::out_of_range("state index out of range");
    const TransitionMatrix p = deflated_transitions_forward(model, taxexp.expense_deflation(), t, s, steps);
    double y = 0.0;
    for (std::size_t j = 0; j < model.n_states(); ++j)
        y += p.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
             payment_rate(model, payments, j, s, s < model.horizon() ? Side::right : Side::left);
    return y;
}

std::vector<double> accumulate_benefit_payments(const PaymentSpec& payments, const ScenarioPath& path) {
    const std::size_t n = path.size();
    if (n == 0 || path.states.size() != n || path.jump_at.size() != n)
        throw std::invalid_argument("malformed scenario path");
    std::vector<double> inc(n, 0.0);
    inc[0] = payments.initial_premium;
    for (std::size_t k = 1; k < n; ++k) {
        const std::size_t z = path.states[k - 1];
        double a = payments.sojourn[z].integral(path.times[k - 1], path.times[k]);
        if (path.is_jump(k)) {
            const JumpRecord& jr = path.jumps[static_cast<std::size_t>(path.jump_at[k])];
            a += payments.transition_payment(jr.from, jr.to)(jr.time);
        }
        inc[k] = a;
    }
    return inc;
}

TaxExpenseStreams accumulate_tax_expense_payments(std::span<const Holding> holdings, const TaxExpenseSpec& taxexp,
                                                  const ScenarioPath& path) {
    const std::size_t n = path.size();
    if (holdings.size() != n)
        throw std::invalid_argument("holdings length " + std::to_string(holdings.size()) +
                                    " does not match path length " + std::to_string(n));
    TaxExpenseStreams out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t k = 1; k < n; ++k) {
        const Holding& h = holdings[k - 1];
        const double gain = h.h0 * (path.savings[k] - path.savings[k - 1]) +
                            h.h1 * (path.bond_prices[k] - path.bond_prices[k - 1]);
        const double value = h.h0 * path.savings[k - 1] + h.h1 * path.bond_prices[k - 1];
        out.tax[k] = taxexp.gamma * gain;
        out.expense[k] = value * (path.accumulated_expense_rate[k] - path.accumulated_expense_rate[k - 1]);
    }
    return out;
}

} // namespace taxhedge
