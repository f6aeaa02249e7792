#include "taxhedge/market_sim.hpp"

#include "taxhedge/rng.hpp"
#include "taxhedge/term_structure.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace taxhedge {

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
    if (steps == 0) throw std::invalid_argument("grid needs at least one step");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
    TimeGrid g;
    g.times.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
        g.times[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
    g.times.back() = horizon;
    return g;
}

void TimeGrid::validate() const {
    if (times.empty()) throw std::invalid_argument("time grid must not be empty");
    if (times.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw std::invalid_argument("time grid must be strictly increasing");
}

namespace {

void fill_prices(const ContractSpec& spec, ScenarioPath& path) {
    const VasicekParams& v = spec.vasicek;
    const double horizon = spec.horizon();
    const double gamma = spec.tax_expense.gamma;
    const std::size_t n = path.size();
    path.bond_prices.resize(n);
    path.savings.resize(n);
    path.after_tax_savings.resize(n);
    path.after_tax_bond.resize(n);
    path.accumulated_expense_rate.resize(n);

    double log_bond_prev = 0.0;
    double log_check_bond = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = path.times[k];
        if (k == 0) {
            path.accumulated_expense_rate[k] = 0.0;
        } else {
            path.accumulated_expense_rate[k] =
                path.accumulated_expense_rate[k - 1] +
                spec.tax_expense.expense_rates[path.states[k - 1]].integral(path.times[k - 1], t);
        }
        const double log_bond = log_bond_price(v, t, path.rates[k], horizon);
        if (k == 0) {
            log_check_bond = log_bond;
        } else {
            const double d_expense = path.accumulated_expense_rate[k] - path.accumulated_expense_rate[k - 1];
            log_check_bond += (1.0 - gamma) * (log_bond - log_bond_prev) +
                              0.5 * (1.0 - gamma) * gamma * v.sigma * v.sigma *
                                  integrated_loading_squared(v, path.times[k - 1], t, horizon) -
                              d_expense;
        }
        log_bond_prev = log_bond;
        path.bond_prices[k] = std::exp(log_bond);
        path.after_tax_bond[k] = std::exp(log_check_bond);
        path.savings[k] = std::exp(path.accumulated_rate[k]);
        path.after_tax_savings[k] =
            std::exp((1.0 - gamma) * path.accumulated_rate[k] - path.accumulated_expense_rate[k]);
    }
}

} // namespace

ScenarioPath simulate_scenario(const ContractSpec& spec, const TimeGrid& grid, std::uint64_t seed) {
    if (grid.times.size() < 2) throw std::invalid_argument("scenario grid needs at least one step");
    if (grid.times.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
    if (std::abs(grid.times.back() - spec.horizon()) > 1e-12 * spec.horizon())
        throw std::invalid_argument("grid horizon does not match the contract horizon");

    std::mt19937_64 state_engine(derive_seed(seed, streams::states, 0));
    std::mt19937_64 rate_engine(derive_seed(seed, streams::rates, 0));
    StatePath z = simulate_state_path(spec.markov, grid.times, spec.initial_state, state_engine);

    ScenarioPath path;
    path.jumps = std::move(z.jumps);
    const std::size_t reserve_n = grid.times.size() + path.jumps.size();
    path.times.reserve(reserve_n);
    path.grid_index.reserve(reserve_n);
    path.states.reserve(reserve_n);
    path.jump_at.reserve(reserve_n);

    std::size_t state = spec.initial_state;
    std::size_t next_jump = 0;
    for (std::size_t k = 0; k < grid.times.size(); ++k) {
        const double t = grid.times[k];
        while (next_jump < path.jumps.size() && path.jumps[next_jump].time < t) {
            const JumpRecord& jr = path.jumps[next_jump];
            state = jr.to;
            path.times.push_back(jr.time);
            path.grid_index.push_back(-1);
            path.states.push_back(state);
            path.jump_at.push_back(static_cast<long>(next_jump));
            ++next_jump;
        }
        long jump_here = -1;
        if (next_jump < path.jumps.size() && path.jumps[next_jump].time == t) {
            state = path.jumps[next_jump].to;
            jump_here = static_cast<long>(next_jump++);
        }
        path.times.push_back(t);
        path.grid_index.push_back(static_cast<long>(k));
        path.states.push_back(state);
        path.jump_at.push_back(jump_here);
    }

    const std::size_t n = path.size();
    path.rates.resize(n);
    path.brownian_increments.assign(n, 0.0);
    path.accumulated_rate.assign(n, 0.0);
    path.rates[0] = spec.vasicek.r0;
    const double h_grid = grid.times[1] - grid.times[0];
    const ShortRateStepper regular(spec.vasicek, h_grid);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 1; k < n; ++k) {
        const double h = path.times[k] - path.times[k - 1];
        ShortRateStepper::Step s;
        if (std::abs(h - h_grid) <= 1e-12 * h_grid) {
            s = regular.advance(path.rates[k - 1], rate_engine, normal);
        } else {
            const ShortRateStepper irregular(spec.vasicek, h);
            s = irregular.advance(path.rates[k - 1], rate_engine, normal);
        }
        path.rates[k] = s.rate;
        path.brownian_increments[k] = s.dw;
        path.accumulated_rate[k] = path.accumulated_rate[k - 1] + s.integral;
    }
    fill_prices(spec, path);
    return path;
}

ScenarioPath coarsen(const ScenarioPath& path, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("coarsening factor must be positive");
    ScenarioPath out;
    out.jumps = path.jumps;
    double dw = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        dw += path.brownian_increments[k];
        const long g = path.grid_index[k];
        const bool keep = path.is_jump(k) || (g >= 0 && static_cast<std::size_t>(g) % factor == 0) || k + 1 == path.size();
        if (!keep) continue;
        if (g >= 0 && static_cast<std::size_t>(g) % factor != 0 && !path.is_jump(k))
            throw std::invalid_argument("grid steps must be divisible by the coarsening factor");
        out.times.push_back(path.times[k]);
        out.grid_index.push_back(g >= 0 && static_cast<std::size_t>(g) % factor == 0 ? g / static_cast<long>(factor) : -1);
        out.rates.push_back(path.rates[k]);
        out.brownian_increments.push_back(dw);
        dw = 0.0;
        out.accumulated_rate.push_back(path.accumulated_rate[k]);
        out.states.push_back(path.states[k]);
        out.jump_at.push_back(path.jump_at[k]);
        out.bond_prices.push_back(path.bond_prices[k]);
        out.savings.push_back(path.savings[k]);
        out.after_tax_savings.push_back(path.after_tax_savings[k]);
        out.after_tax_bond.push_back(path.after_tax_bond[k]);
        out.accumulated_expense_rate.push_back(path.accumulated_expense_rate[k]);
    }
    return out;
}

PathValuator::PathValuator(const ContractSpec& spec, const TimeGrid& grid, const NumericsConfig& cfg,
                           Execution exec)
    : spec_(spec), grid_(grid), cfg_(cfg), surface_(spec, grid.times, cfg, exec) {
    grid_.validate();
    if (std::abs(grid_.horizon() - spec.horizon()) > 1e-12 * spec.horizon())
        throw std::invalid_argument("grid horizon does not match the contract horizon");
}

void PathValuator::value(const ScenarioPath& path, PathValuation& out) const {
    const std::size_t ns = spec_.n_states();
    out.n_states = ns;
    out.reserves.resize(path.size() * ns);
    out.bond_units.resize(path.size() * ns);
    for (std::size_t k = 0; k < path.size(); ++k) {
        const long g = path.grid_index[k];
        if (g >= 0) {
            surface_.evaluate(static_cast<std::size_t>(g), path.rates[k], &out.reserves[k * ns],
                              &out.bond_units[k * ns]);
        } else {
            const CashflowProfile profile(spec_, path.times[k], cfg_);
            const StateValues sv = value_states(spec_, profile, path.rates[k]);
            std::copy(sv.reserves.begin(), sv.reserves.end(), out.reserves.begin() + static_cast<long>(k * ns));
            std::copy(sv.bond_units.begin(), sv.bond_units.end(),
                      out.bond_units.begin() + static_cast<long>(k * ns));
        }
    }
}

PathValuation PathValuator::value(const ScenarioPath& path) const {
    PathValuation out;
    value(path, out);
    return out;
}

PathValuation PathValuator::value_direct(const ScenarioPath& path) const {
    const std::size_t ns = spec_.n_states();
    PathValuation out{ns, std::vector<double>(path.size() * ns), std::vector<double>(path.size() * ns)};
    for (std::size_t k = 0; k < path.size(); ++k) {
        const CashflowProfile profile(spec_, path.times[k], cfg_);
        const StateValues sv = value_states(spec_, profile, path.rates[k]);
        for (std::size_t i = 0; i < ns; ++i) {
            out.reserves[k * ns + i] = sv.reserves[i];
            out.bond_units[k * ns + i] = sv.bond_units[i];
        }
    }
    return out;
}

StrategyPoint OptimalStrategy::at(const ScenarioPath& path, const PathValuation& valuation, std::size_t node) const {
    if (node + 1 == path.size()) return {};
    const std::size_t z = path.states[node];
    StrategyPoint p;
    p.h1 = valuation.units(node, z);
    p.value = valuation.reserve(node, z);
    p.h0 = (p.value - p.h1 * path.bond_prices[node]) / path.savings[node];
    return p;
}

StrategyPoint Perturbation::apply(const StrategyPoint& optimal, double t, double horizon, double r, double theta,
                                  std::size_t state, double savings, double bond) const {
    const double u = t / horizon;
    StrategyPoint p = optimal;
    if (only_state < 0 || static_cast<std::size_t>(only_state) == state)
        p.h1 = scale * optimal.h1 + shift + slope * u + wave * std::sin(2.0 * std::numbers::pi * u) +
               rate_loading * (r - theta);
    p.value = optimal.value + value_shift * (1.0 - u);
    p.h0 = (p.value - p.h1 * bond) / savings;
    return p;
}

StrategyPoint PerturbedStrategy::at(const ScenarioPath& path, const PathValuation& valuation, std::size_t node) const {
    if (node + 1 == path.size()) return {};
    const StrategyPoint opt = OptimalStrategy{}.at(path, valuation, node);
    return p_.apply(opt, path.times[node], horizon_, path.rates[node], theta_, path.states[node],
                    path.savings[node], path.bond_prices[node]);
}

std::vector<Perturbation> standard_perturbations(std::size_t random_count, std::uint64_t seed, double unit) {
    std::vector<Perturbation> out;
    auto add = [&](Perturbation p) { out.push_back(std::move(p)); };
    add({.label = "shift_up", .shift = 0.25 * unit});
    add({.label = "shift_down", .shift = -0.25 * unit});
    add({.label = "scale_up", .scale = 1.2});
    add({.label = "scale_down", .scale = 0.8});
    add({.label = "double", .scale = 2.0});
    add({.label = "no_bond", .scale = 0.0});
    add({.label = "sign_flip", .scale = -1.0});
    add({.label = "ramp", .slope = 0.5 * unit});
    add({.label = "rate_loading", .rate_loading = 10.0 * unit});
    add({.label = "state0_only", .shift = 0.5 * unit, .only_state = 0});
    add({.label = "value_shift", .value_shift = 0.01});
    std::mt19937_64 engine(derive_seed(seed, streams::perturbations, 0));
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (std::size_t i = 0; i < random_count; ++i) {
        Perturbation p;
        p.label = "random_" + std::to_string(i);
        p.shift = unit * u(engine);
        p.slope = unit * u(engine);
        p.wave = unit * u(engine);
        add(std::move(p));
    }
    return out;
}

CostDiagnostics run_strategy(const ContractSpec& spec, const ScenarioPath& path, const PathValuation& valuation,
                             const Strategy& strategy) {
    const std::size_t n = path.size();
    if (valuation.reserves.size() != n * spec.n_states()) throw std::invalid_argument("valuation does not match path");
    const double gamma = spec.tax_expense.gamma;
    CostDiagnostics d;
    d.benefit = accumulate_benefit_payments(spec.payments, path);
    d.holdings.resize(n);
    d.tax.assign(n, 0.0);
    d.expense.assign(n, 0.0);
    d.cost.resize(n);
    d.discounted_cost.resize(n);
    d.modified_cost.resize(n);
    for (std::size_t k = 0; k < n; ++k) d.holdings[k] = strategy.at(path, valuation, k);
    d.holdings.back() = StrategyPoint{};

    d.cost[0] = d.holdings[0].value + d.benefit[0];
    d.discounted_cost[0] = d.cost[0];
    d.modified_cost[0] = d.cost[0];
    for (std::size_t k = 1; k < n; ++k) {
        const CostStep s = cost_step(path, k, d.holdings[k - 1], d.holdings[k].value, d.benefit[k], gamma);
        d.tax[k] = s.tax;
        d.expense[k] = s.expense;
        d.cost[k] = d.cost[k - 1] + s.cost;
        d.discounted_cost[k] = d.discounted_cost[k - 1] + s.cost / path.savings[k - 1];
        d.modified_cost[k] = d.modified_cost[k - 1] + s.cost / path.after_tax_savings[k - 1];
    }
    return d;
}

std::vector<double> residual_increments(const ContractSpec& spec, const ScenarioPath& path,
                                        const PathValuation& valuation) {
    const std::size_t n = path.size();
    const std::size_t ns = spec.n_states();
    std::vector<double> inc(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        const std::size_t j = path.states[k - 1];
        const double t0 = path.times[k - 1];
        double compensator = 0.0;
        for (std::size_t m = 0; m < ns; ++m) {
            if (!spec.markov.has_transition(j, m)) continue;
            const double v = spec.payments.transition_payment(j, m)(t0) + valuation.reserve(k - 1, m) -
                             valuation.reserve(k - 1, j);
            compensator += v * spec.markov.intensity(j, m).integral(t0, path.times[k]);
        }
        double jump = 0.0;
        if (path.is_jump(k)) {
            const JumpRecord& jr = path.jumps[static_cast<std::size_t>(path.jump_at[k])];
            jump = (spec.payments.transition_payment(jr.from, jr.to)(jr.time) + valuation.reserve(k, jr.to) -
                    valuation.reserve(k, jr.from)) /
                   path.after_tax_savings[k];
        }
        inc[k] = jump - compensator / path.after_tax_savings[k - 1];
    }
    return inc;
}

Holding after_tax_strategy_map(const ScenarioPath& path, std::size_t node, const AfterTaxHolding& check) {
    const double s0 = path.savings[node];
    const double s1 = path.bond_prices[node];
    const double c0 = path.after_tax_savings[node];
    const double c1 = path.after_tax_bond[node];
    if (!(s0 > 0.0) || !(s1 > 0.0) || !(c0 > 0.0) || !(c1 > 0.0))
        throw std::logic_error("asset prices must be strictly positive");
    Holding h;
    h.h1 = (c1 / s1) * check.h1;
    // Prices are continuous, so S1(t-)/S1(t) * S1check(t)/S1check(t-) = 1 and the
    // correction to the savings-account position vanishes.
    h.h0 = (c0 / s0) * check.h0 + (check.h1 * c1 - h.h1 * s1) / s0;
    return h;
}

AfterTaxHolding after_tax_optimal_holding(const ContractSpec& spec, const ScenarioPath& path, std::size_t node,
                                          const NumericsConfig& cfg) {
    const double t = path.times[node];
    if (node + 1 == path.size() || t >= spec.horizon()) return {};
    const double r = path.rates[node];
    const double gamma = spec.tax_expense.gamma;
    const std::size_t z = path.states[node];
    const CashflowProfile profile(spec, t, cfg);
    double value = 0.0;
    double sensitivity = 0.0;
    const auto nodes = profile.nodes();
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const BondQuote g = bond_price_tax_scaled(spec.vasicek, gamma, t, r, nodes[q].s);
        value += nodes[q].weight * g.value * profile.y(q, z);
        sensitivity += nodes[q].weight * g.rate_sensitivity * profile.y(q, z);
    }
    const double loading = vasicek_loading(spec.vasicek.kappa, spec.horizon() - t);
    AfterTaxHolding h;
    h.h1 = -sensitivity / (path.after_tax_bond[node] * (1.0 - gamma) * loading);
    h.h0 = (value - h.h1 * path.after_tax_bond[node]) / path.after_tax_savings[node];
    return h;
}

} // namespace taxhedge
