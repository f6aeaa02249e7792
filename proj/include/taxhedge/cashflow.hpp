#pragma once

#include "taxhedge/markov_engine.hpp"
#include "taxhedge/piecewise.hpp"
#include "taxhedge/quadrature.hpp"
#include "taxhedge/scenario_path.hpp"

#include <span>
#include <vector>

namespace taxhedge {

struct PaymentSpec {
    double initial_premium = 0.0;               // A^b(0)
    std::vector<PiecewiseConstant> sojourn;     // b_j, one per state
    std::vector<PiecewiseConstant> transition;  // b_jk, row-major n x n, diagonal unused

    static PaymentSpec zero(std::size_t n_states);

    std::size_t n_states() const { return sojourn.size(); }
    const PiecewiseConstant& transition_payment(std::size_t from, std::size_t to) const {
        return transition[from * n_states() + to];
    }
    PiecewiseConstant& transition_payment(std::size_t from, std::size_t to) {
        return transition[from * n_states() + to];
    }

    PaymentSpec scaled(double factor) const;
    void collect_breakpoints(double a, double b, std::vector<double>& out) const;
    void validate(std::size_t n_states) const;
};

struct TaxExpenseSpec {
    double gamma = 0.0;
    std::vector<PiecewiseConstant> expense_rates;  // delta_j, one per state

    static TaxExpenseSpec none(std::size_t n_states);

    // Deflation spec giving the expense-inflated probabilities: the engine
    // deflates by exp(-int rate), so the expense rates enter negated.
    DeflationSpec expense_deflation() const;
    double expense_rate(std::size_t state, double t) const { return expense_rates[state](t); }
    void validate(std::size_t n_states) const;
};

// b_j(s) + sum_k mu_jk(s) b_jk(s), with one-sided values at breakpoints.
double payment_rate(const MarkovModel& model, const PaymentSpec& payments, std::size_t state, double s, Side side);

// Y_i(t, s) = sum_j p_ij(t, s) (b_j(s) + sum_k mu_jk(s) b_jk(s)) with expense-inflated p.
double expected_modified_cashflow(const MarkovModel& model, const PaymentSpec& payments,
                                  const TaxExpenseSpec& taxexp, std::size_t i, double t, double s,
                                  std::size_t steps);

// Increment of A^b per node: entry 0 is A^b(0); entry n is the exact sojourn
// integral over (t_{n-1}, t_n] plus the transition payment of a jump at t_n.
std::vector<double> accumulate_benefit_payments(const PaymentSpec& payments, const ScenarioPath& path);

struct Holding {
    double h0 = 0.0;  // savings-account units
    double h1 = 0.0;  // bond units
};

struct TaxExpenseStreams {
    std::vector<double> tax;      // increments of A^tax, 0 at node 0
    std::vector<double> expense;  // increments of A^e, 0 at node 0
};

// Left-point discretization: holdings[n] is held over (t_n, t_{n+1}].
// tax_n = gamma (h0 dS0 + h1 dS1), expense_n = V_{n-1} int delta_{Z} du.
TaxExpenseStreams accumulate_tax_expense_payments(std::span<const Holding> holdings, const TaxExpenseSpec& taxexp,
                                                  const ScenarioPath& path);

} // namespace taxhedge
