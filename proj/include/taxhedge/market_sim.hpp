#pragma once

#include "taxhedge/contract.hpp"
#include "taxhedge/hedging.hpp"
#include "taxhedge/scenario_path.hpp"
#include "taxhedge/stats.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace taxhedge {

// Z is simulated first on the grid; its jump times are merged into the node
// list and the short rate is then stepped exactly over the merged nodes.
ScenarioPath simulate_scenario(const ContractSpec& spec, const TimeGrid& grid, std::uint64_t seed);

// Keeps every factor-th grid node plus all jump nodes of a path simulated on a
// grid with steps divisible by factor. Prices at kept nodes are unchanged.
ScenarioPath coarsen(const ScenarioPath& path, std::size_t factor);

// All-state reserves and bond units at every node of a path.
struct PathValuation {
    std::size_t n_states = 0;
    std::vector<double> reserves;    // [node][state]
    std::vector<double> bond_units;  // [node][state]

    double reserve(std::size_t node, std::size_t state) const { return reserves[node * n_states + state]; }
    double units(std::size_t node, std::size_t state) const { return bond_units[node * n_states + state]; }
};

class PathValuator {
public:
    PathValuator(const ContractSpec& spec, const TimeGrid& grid, const NumericsConfig& cfg,
                 Execution exec = Execution::parallel);

    const ContractSpec& spec() const { return spec_; }
    const TimeGrid& grid() const { return grid_; }
    const NumericsConfig& numerics() const { return cfg_; }
    const HedgeSurface& surface() const { return surface_; }

    // Surface at grid nodes, direct quadrature at inserted jump nodes.
    void value(const ScenarioPath& path, PathValuation& out) const;
    PathValuation value(const ScenarioPath& path) const;
    // Direct quadrature at every node.
    PathValuation value_direct(const ScenarioPath& path) const;

private:
    ContractSpec spec_;
    TimeGrid grid_;
    NumericsConfig cfg_;
    HedgeSurface surface_;
};

// Holdings chosen at node n are kept over (t_n, t_{n+1}]; the terminal node
// must return the zero portfolio.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual StrategyPoint at(const ScenarioPath& path, const PathValuation& valuation, std::size_t node) const = 0;
    virtual std::string label() const = 0;
};

class OptimalStrategy final : public Strategy {
public:
    StrategyPoint at(const ScenarioPath& path, const PathValuation& valuation, std::size_t node) const override;
    std::string label() const override { return "optimal"; }
};

class ZeroStrategy final : public Strategy {
public:
    StrategyPoint at(const ScenarioPath&, const PathValuation&, std::size_t) const override { return {}; }
    std::string label() const override { return "zero"; }
};

// h1 -> scale h1 + shift + slope t/T + wave sin(2 pi t/T) + rate_loading (r - theta),
// optionally only in one state; value -> value + value_shift (1 - t/T).
struct Perturbation {
    std::string label;
    double scale = 1.0;
    double shift = 0.0;
    double slope = 0.0;
    double wave = 0.0;
    double rate_loading = 0.0;
    long only_state = -1;
    double value_shift = 0.0;

    StrategyPoint apply(const StrategyPoint& optimal, double t, double horizon, double r, double theta,
                        std::size_t state, double savings, double bond) const;
};

// Structured bumps plus `random_count` random a + b t/T + c sin(2 pi t/T)
// bumps, all sized relative to `unit` bond units.
std::vector<Perturbation> standard_perturbations(std::size_t random_count, std::uint64_t seed, double unit);

class PerturbedStrategy final : public Strategy {
public:
    PerturbedStrategy(const ContractSpec& spec, Perturbation p) : horizon_(spec.horizon()), theta_(spec.vasicek.theta), p_(std::move(p)) {}
    StrategyPoint at(const ScenarioPath& path, const PathValuation& valuation, std::size_t node) const override;
    std::string label() const override { return p_.label; }

private:
    double horizon_;
    double theta_;
    Perturbation p_;
};

struct CostDiagnostics {
    std::vector<StrategyPoint> holdings;
    std::vector<double> benefit;          // increments of A^b, entry 0 = A^b(0)
    std::vector<double> tax;              // increments of A^tax
    std::vector<double> expense;          // increments of A^e
    std::vector<double> cost;             // C(h, t_n)
    std::vector<double> discounted_cost;  // C*(h, t_n)
    std::vector<double> modified_cost;    // C~(h, t_n)

    double terminal_cost() const { return modified_cost.back(); }
    double modified_cost_change() const { return modified_cost.back() - modified_cost.front(); }
};

// One cost step: increment of C over (t_{n-1}, t_n] for holdings `prev`, new
// value `value_now`, benefit increment `benefit`.
struct CostStep {
    double cost = 0.0;
    double tax = 0.0;
    double expense = 0.0;
};

inline CostStep cost_step(const ScenarioPath& path, std::size_t n, const StrategyPoint& prev, double value_now,
                          double benefit, double gamma) {
    const double gain = prev.h0 * (path.savings[n] - path.savings[n - 1]) +
                        prev.h1 * (path.bond_prices[n] - path.bond_prices[n - 1]);
    CostStep s;
    s.tax = gamma * gain;
    s.expense = prev.value * (path.accumulated_expense_rate[n] - path.accumulated_expense_rate[n - 1]);
    s.cost = value_now - prev.value - gain + benefit + s.tax + s.expense;
    return s;
}

CostDiagnostics run_strategy(const ContractSpec& spec, const ScenarioPath& path, const PathValuation& valuation,
                             const Strategy& strategy);

// Realized increments of L = sum_jk int v_jk dM_jk per node (0 at node 0):
// jump part at jump nodes, left-point compensator otherwise.
std::vector<double> residual_increments(const ContractSpec& spec, const ScenarioPath& path,
                                        const PathValuation& valuation);

struct RiskEstimate {
    Estimate risk;         // mean of (C~(T) - C~(0))^2
    Estimate mean_change;  // mean of C~(T) - C~(0)
};

// Generic (virtual-dispatch) route; the batch kernels are the fast path.
RiskEstimate estimate_modified_risk(const PathValuator& valuator, const Strategy& strategy, std::size_t n_paths,
                                    std::uint64_t seed, Execution exec = Execution::parallel);

// Holdings in the after-tax market (S0 check, S1 check).
struct AfterTaxHolding {
    double h0 = 0.0;
    double h1 = 0.0;
};

// Before-tax holdings with equal per-asset exposure and equal total value.
Holding after_tax_strategy_map(const ScenarioPath& path, std::size_t node, const AfterTaxHolding& check);

// Risk-minimizing holdings in the after-tax market, from the GKW integrand of
// the intrinsic value against the discounted after-tax bond. Uses the tax-scaled
// rate sensitivities directly. Evaluated by direct quadrature.
AfterTaxHolding after_tax_optimal_holding(const ContractSpec& spec, const ScenarioPath& path, std::size_t node,
                                          const NumericsConfig& cfg);

struct TwoStepReport {
    Estimate discounted_total;  // E[A*(T)]
    double intrinsic_value = 0.0;  // A(0) + V_{Z(0)}(0)
    double gap = 0.0;
    double z_score = 0.0;
    bool consistent = false;
};

TwoStepReport two_step_check(const ContractSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                             std::uint64_t seed, const NumericsConfig& cfg = {},
                             Execution exec = Execution::parallel);

} // namespace taxhedge
