#include "taxhedge/mc_kernels.hpp"

#include "taxhedge/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace taxhedge {

std::vector<double> BatchOutcome::perturbed(std::size_t p) const {
    std::vector<double> out(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) out[i] = perturbed_change[i * n_perturbations + p];
    return out;
}

namespace {

struct Workspace {
    PathValuation valuation;
    std::vector<StrategyPoint> prev;
    std::vector<double> change;
};

void allocate(BatchOutcome& out, const BatchConfig& cfg) {
    if (cfg.n_paths < 2) throw std::invalid_argument("a batch needs at least two paths");
    out.n_paths = cfg.n_paths;
    out.n_perturbations = cfg.perturbations.size();
    out.cost_change.assign(cfg.n_paths, 0.0);
    out.residual.assign(cfg.n_paths, 0.0);
    out.two_step_total.assign(cfg.n_paths, 0.0);
    out.bond_martingale.assign(cfg.n_paths, 0.0);
    out.after_tax_bond_martingale.assign(cfg.n_paths, 0.0);
    out.perturbed_change.assign(cfg.n_paths * cfg.perturbations.size(), 0.0);
    out.jump_count.assign(cfg.n_paths, 0);
}

// Everything for path i, written to slot i only.
void evaluate_path(const PathValuator& valuator, const BatchConfig& cfg, std::size_t i, Workspace& ws,
                   BatchOutcome& out) {
    const ContractSpec& spec = valuator.spec();
    const double gamma = spec.tax_expense.gamma;
    const double horizon = spec.horizon();
    const double theta = spec.vasicek.theta;
    const ScenarioPath path = simulate_scenario(spec, valuator.grid(), derive_seed(cfg.seed, streams::path, i));
    valuator.value(path, ws.valuation);
    const std::vector<double> benefit = accumulate_benefit_payments(spec.payments, path);
    const std::vector<double> residual = residual_increments(spec, path, ws.valuation);

    const std::size_t n = path.size();
    const std::size_t np = cfg.perturbations.size();
    const OptimalStrategy optimal;
    ws.prev.assign(np, StrategyPoint{});
    ws.change.assign(np, 0.0);

    StrategyPoint prev = optimal.at(path, ws.valuation, 0);
    for (std::size_t p = 0; p < np; ++p)
        ws.prev[p] = cfg.perturbations[p].apply(prev, path.times[0], horizon, path.rates[0], theta, path.states[0],
                                                path.savings[0], path.bond_prices[0]);
    double change = 0.0;
    double total = benefit[0];
    double l_total = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        const bool last = k + 1 == n;
        const StrategyPoint cur = last ? StrategyPoint{} : optimal.at(path, ws.valuation, k);
        const CostStep s = cost_step(path, k, prev, cur.value, benefit[k], gamma);
        change += s.cost / path.after_tax_savings[k - 1];
        total += (benefit[k] + s.tax + s.expense) / path.savings[k - 1];
        l_total += residual[k];
        for (std::size_t p = 0; p < np; ++p) {
            const StrategyPoint pc =
                last ? StrategyPoint{}
                     : cfg.perturbations[p].apply(cur, path.times[k], horizon, path.rates[k], theta, path.states[k],
                                                  path.savings[k], path.bond_prices[k]);
            const CostStep ps = cost_step(path, k, ws.prev[p], pc.value, benefit[k], gamma);
            ws.change[p] += ps.cost / path.after_tax_savings[k - 1];
            ws.prev[p] = pc;
        }
        prev = cur;
    }
    out.cost_change[i] = change;
    out.residual[i] = l_total;
    out.two_step_total[i] = total;
    out.bond_martingale[i] = path.bond_prices[n - 1] / path.savings[n - 1] - path.bond_prices[0] / path.savings[0];
    out.after_tax_bond_martingale[i] = path.after_tax_bond[n - 1] / path.after_tax_savings[n - 1] -
                                       path.after_tax_bond[0] / path.after_tax_savings[0];
    for (std::size_t p = 0; p < np; ++p) out.perturbed_change[i * np + p] = ws.change[p];
    out.jump_count[i] = path.jumps.size();
}

} // namespace

BatchOutcome run_batch_serial(const PathValuator& valuator, const BatchConfig& cfg) {
    BatchOutcome out;
    allocate(out, cfg);
    Workspace ws;
    for (std::size_t i = 0; i < cfg.n_paths; ++i) evaluate_path(valuator, cfg, i, ws, out);
    return out;
}

BatchOutcome run_batch_parallel(const PathValuator& valuator, const BatchConfig& cfg) {
    BatchOutcome out;
    allocate(out, cfg);
    const auto count = static_cast<long>(cfg.n_paths);
#pragma omp parallel num_threads(worker_threads())
    {
        Workspace ws;
#pragma omp for schedule(dynamic, 64)
        for (long i = 0; i < count; ++i) evaluate_path(valuator, cfg, static_cast<std::size_t>(i), ws, out);
    }
    return out;
}

BatchOutcome run_batch(const PathValuator& valuator, const BatchConfig& cfg, Execution exec) {
    return exec == Execution::serial ? run_batch_serial(valuator, cfg) : run_batch_parallel(valuator, cfg);
}

RiskReport summarize(const BatchOutcome& o, const std::vector<Perturbation>& perturbations) {
    RiskReport r;
    r.n_paths = o.n_paths;
    std::vector<double> sq(o.n_paths), lsq(o.n_paths);
    for (std::size_t i = 0; i < o.n_paths; ++i) {
        sq[i] = o.cost_change[i] * o.cost_change[i];
        lsq[i] = o.residual[i] * o.residual[i];
    }
    r.mean_change = estimate_mean(o.cost_change);
    r.risk = estimate_mean(sq);
    r.residual_risk = estimate_mean(lsq);
    r.risk_gap = estimate_difference(sq, lsq);
    r.bond_martingale = estimate_mean(o.bond_martingale);
    r.after_tax_bond_martingale = estimate_mean(o.after_tax_bond_martingale);
    r.residual_bond_covariance = estimate_covariance(o.residual, o.bond_martingale);
    r.two_step_total = estimate_mean(o.two_step_total);
    for (std::size_t p = 0; p < o.n_perturbations; ++p) {
        std::vector<double> psq = o.perturbed(p);
        for (double& x : psq) x *= x;
        PerturbationResult pr;
        pr.label = p < perturbations.size() ? perturbations[p].label : std::to_string(p);
        pr.risk = estimate_mean(psq);
        pr.excess = estimate_difference(psq, sq);
        pr.bound = 2.0 * combined_error(r.risk, pr.risk);
        pr.passed = r.risk.mean <= pr.risk.mean + pr.bound;
        r.perturbations.push_back(std::move(pr));
    }
    return r;
}

RiskEstimate estimate_modified_risk(const PathValuator& valuator, const Strategy& strategy, std::size_t n_paths,
                                    std::uint64_t seed, Execution exec) {
    if (n_paths < 2) throw std::invalid_argument("risk estimation needs at least two paths");
    std::vector<double> change(n_paths);
    const auto count = static_cast<long>(n_paths);
    auto body = [&](long i) {
        const auto idx = static_cast<std::size_t>(i);
        const ScenarioPath path =
            simulate_scenario(valuator.spec(), valuator.grid(), derive_seed(seed, streams::path, idx));
        const PathValuation val = valuator.value(path);
        change[idx] = run_strategy(valuator.spec(), path, val, strategy).modified_cost_change();
    };
    if (exec == Execution::serial) {
        for (long i = 0; i < count; ++i) body(i);
    } else {
#pragma omp parallel for schedule(dynamic, 64) num_threads(worker_threads())
        for (long i = 0; i < count; ++i) body(i);
    }
    std::vector<double> sq(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) sq[i] = change[i] * change[i];
    return RiskEstimate{estimate_mean(sq), estimate_mean(change)};
}

TwoStepReport two_step_check(const ContractSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                             std::uint64_t seed, const NumericsConfig& cfg, Execution exec) {
    const PathValuator valuator(spec, grid, cfg, exec);
    const BatchOutcome o = run_batch(valuator, BatchConfig{n_paths, seed, {}}, exec);
    TwoStepReport rep;
    rep.discounted_total = estimate_mean(o.two_step_total);
    rep.intrinsic_value = spec.payments.initial_premium + reserve(spec, spec.initial_state, 0.0, spec.vasicek.r0, cfg);
    rep.gap = rep.discounted_total.mean - rep.intrinsic_value;
    rep.z_score = rep.discounted_total.z_score(rep.intrinsic_value);
    rep.consistent = rep.z_score <= 3.0;
    return rep;
}

} // namespace taxhedge
