#pragma once

#include "taxhedge/execution.hpp"
#include "taxhedge/market_sim.hpp"
#include "taxhedge/stats.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace taxhedge {

struct BatchConfig {
    std::size_t n_paths = 100000;
    std::uint64_t seed = 0;
    std::vector<Perturbation> perturbations;
};

// Per-path results; slot i always belongs to path i with seed derive_seed(seed, path, i).
struct BatchOutcome {
    std::size_t n_paths = 0;
    std::size_t n_perturbations = 0;
    std::vector<double> cost_change;       // C~(T) - C~(0) under the optimal strategy
    std::vector<double> residual;          // L(T)
    std::vector<double> two_step_total;    // A*(T) with A = A^b + A^tax + A^e under the optimal strategy
    std::vector<double> bond_martingale;   // S1*(T) - S1*(0)
    std::vector<double> after_tax_bond_martingale;  // S1check*(T) - S1check*(0)
    std::vector<double> perturbed_change;  // [path][perturbation] C~(T) - C~(0)
    std::vector<std::size_t> jump_count;

    std::vector<double> perturbed(std::size_t p) const;
};

BatchOutcome run_batch_serial(const PathValuator& valuator, const BatchConfig& cfg);
BatchOutcome run_batch_parallel(const PathValuator& valuator, const BatchConfig& cfg);
BatchOutcome run_batch(const PathValuator& valuator, const BatchConfig& cfg, Execution exec);

struct PerturbationResult {
    std::string label;
    Estimate risk;
    Estimate excess;  // paired mean of perturbed minus optimal squared cost
    double bound = 0.0;  // 2 sqrt(se_opt^2 + se_pert^2)
    bool passed = false;
};

struct RiskReport {
    std::size_t n_paths = 0;
    Estimate mean_change;
    Estimate risk;
    Estimate residual_risk;
    Estimate risk_gap;  // paired mean of (C~ change)^2 - L(T)^2
    Estimate bond_martingale;
    Estimate after_tax_bond_martingale;
    Estimate residual_bond_covariance;
    Estimate two_step_total;
    std::vector<PerturbationResult> perturbations;
};

RiskReport summarize(const BatchOutcome& outcome, const std::vector<Perturbation>& perturbations);

} // namespace taxhedge
