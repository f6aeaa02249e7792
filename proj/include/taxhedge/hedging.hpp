#pragma once

#include "taxhedge/contract.hpp"
#include "taxhedge/execution.hpp"
#include "taxhedge/quadrature.hpp"

#include <span>
#include <vector>

namespace taxhedge {

struct NumericsConfig {
    std::size_t quad_intervals = 200;  // Simpson sub-intervals over [t, T]
    std::size_t ode_substeps = 4;      // RK4 steps between consecutive quadrature nodes
    std::size_t chebyshev_nodes = 32;  // rate nodes per time in a HedgeSurface

    void validate() const;
    bool operator==(const NumericsConfig&) const = default;
};

// Y_i(t, s) for every state i at the Simpson nodes s of [t, T], from one
// forward sweep of the expense-inflated transition probabilities.
class CashflowProfile {
public:
    CashflowProfile(const ContractSpec& spec, double t, const NumericsConfig& cfg);

    double time() const { return t_; }
    std::size_t n_states() const { return n_; }
    std::span<const QuadratureNode> nodes() const { return nodes_; }
    double y(std::size_t q, std::size_t state) const { return y_[q * n_ + state]; }

private:
    double t_;
    std::size_t n_;
    std::vector<QuadratureNode> nodes_;
    std::vector<double> y_;
};

struct StateValues {
    std::vector<double> reserves;    // V_i(t) at rate r
    std::vector<double> bond_units;  // optimal bond holding when Z(t-) = i
};

StateValues value_states(const ContractSpec& spec, const CashflowProfile& profile, double r);

double reserve(const ContractSpec& spec, std::size_t state, double t, double r, const NumericsConfig& cfg = {});

struct StrategyPoint {
    double h0 = 0.0;
    double h1 = 0.0;
    double value = 0.0;
};

// Bond units from Z(t-) = state_pre, value from Z(t) = state_now; identically
// zero at t = T.
StrategyPoint optimal_strategy(const ContractSpec& spec, std::size_t state_pre, std::size_t state_now, double t,
                               double r, double accumulated_rate, const NumericsConfig& cfg = {});
StrategyPoint strategy_from_values(const StateValues& values, std::size_t state_pre, std::size_t state_now,
                                   double savings, double bond);

struct TransitionIntegrand {
    std::size_t from = 0;
    std::size_t to = 0;
    double value = 0.0;
};

struct GKWIntegrands {
    std::vector<double> xi;               // per state, integrand against S1*
    std::vector<TransitionIntegrand> v;   // one per possible transition
};

GKWIntegrands gkw_integrands(const ContractSpec& spec, double t, double r, double accumulated_rate,
                             double accumulated_expense, const NumericsConfig& cfg = {});
GKWIntegrands gkw_from_values(const ContractSpec& spec, const StateValues& values, double t,
                              double accumulated_rate, double accumulated_expense);

struct ReserveCurve {
    std::vector<double> times;
    std::vector<double> rates;
    std::vector<std::vector<double>> values;  // values[k][i] = V_i(times[k]) at rates[k]
    NumericsConfig quadrature;
};

ReserveCurve reserve_curve(const ContractSpec& spec, std::span<const double> times, std::span<const double> rates,
                           const NumericsConfig& cfg = {}, Execution exec = Execution::parallel);

// Per-time Chebyshev interpolants in r of all state reserves and bond units.
// Rates outside the fitted band are evaluated directly from the stored profile.
class HedgeSurface {
public:
    HedgeSurface(const ContractSpec& spec, std::span<const double> times, const NumericsConfig& cfg,
                 Execution exec = Execution::parallel);

    std::size_t size() const { return times_.size(); }
    double time(std::size_t k) const { return times_[k]; }
    double rate_low() const { return centre_ - half_width_; }
    double rate_high() const { return centre_ + half_width_; }

    // Writes n_states reserves and n_states bond units.
    void evaluate(std::size_t k, double r, double* reserves, double* bond_units) const;
    StateValues evaluate(std::size_t k, double r) const;

private:
    ContractSpec spec_;
    std::vector<double> times_;
    std::vector<CashflowProfile> profiles_;
    std::size_t n_;
    std::size_t m_;
    double centre_;
    double half_width_;
    std::vector<double> coeffs_;  // [k][state][reserve|units][m]
};

} // namespace taxhedge
