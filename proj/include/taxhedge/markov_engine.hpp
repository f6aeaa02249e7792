#pragma once

#include "taxhedge/piecewise.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace taxhedge {

// Finite-state time-inhomogeneous Markov jump process with piecewise-constant
// transition intensities on [0, horizon]. The diagonal of the generator is
// always derived from the off-diagonal entries.
class MarkovModel {
public:
    MarkovModel() = default;
    MarkovModel(std::size_t n_states, double horizon);

    std::size_t n_states() const { return n_; }
    double horizon() const { return horizon_; }

    void set_intensity(std::size_t from, std::size_t to, PiecewiseConstant mu);
    const PiecewiseConstant& intensity(std::size_t from, std::size_t to) const { return mu_[from * n_ + to]; }

    // true when the intensity is not identically zero
    bool has_transition(std::size_t from, std::size_t to) const;

    double rate(std::size_t from, std::size_t to, double t) const { return intensity(from, to)(t); }
    double exit_rate(std::size_t from, double t) const;
    // Upper bound of the exit rate over [0, horizon], exact for piecewise-constant intensities.
    double exit_rate_bound(std::size_t from) const;

    Eigen::MatrixXd generator(double t) const;

    // All intensity breakpoints strictly inside (a, b), sorted and unique.
    std::vector<double> breakpoints(double a, double b) const;

    void validate() const;

private:
    std::size_t n_ = 0;
    double horizon_ = 0.0;
    std::vector<PiecewiseConstant> mu_;
};

// State-wise deflation rates delta_j(t). Transition probabilities deflated by
// exp(-int delta_{Z(u)}(u) du); pass negated rates for an inflating factor.
struct DeflationSpec {
    std::vector<PiecewiseConstant> state_rates;

    static DeflationSpec zero(std::size_t n_states);
    DeflationSpec negated() const;
    double rate(std::size_t state, double t) const { return state_rates[state](t); }
    void collect_breakpoints(double a, double b, std::vector<double>& out) const;
};

struct TransitionMatrix {
    Eigen::MatrixXd p;
    double t = 0.0;
    double s = 0.0;
};

// d/ds p(t,s) = p(t,s) [mu - diag(delta)](s), p(t,t) = I; RK4 on `steps` uniform
// sub-intervals, further split at intensity and deflation breakpoints.
TransitionMatrix deflated_transitions_forward(const MarkovModel& model, const DeflationSpec& deflation, double t,
                                              double s, std::size_t steps);

// d/dt p(t,s) = -[mu - diag(delta)](t) p(t,s), integrated from t = s down to t.
TransitionMatrix deflated_transitions_backward(const MarkovModel& model, const DeflationSpec& deflation, double t,
                                               double s, std::size_t steps);

// Forward solution p(t, s_q) at every node of a nondecreasing list s_q >= t,
// using `steps_per_interval` RK4 steps between consecutive nodes.
std::vector<Eigen::MatrixXd> deflated_transitions_sweep(const MarkovModel& model, const DeflationSpec& deflation,
                                                        double t, std::span<const double> nodes,
                                                        std::size_t steps_per_interval);

struct JumpRecord {
    double time = 0.0;
    std::size_t from = 0;
    std::size_t to = 0;
};

struct StatePath {
    std::vector<std::size_t> states;  // Z at each grid time
    std::vector<JumpRecord> jumps;
};

// Competing-risks sampling with thinning against the per-state exit-rate bound.
StatePath simulate_state_path(const MarkovModel& model, std::span<const double> grid, std::size_t initial_state,
                              std::uint64_t seed);
StatePath simulate_state_path(const MarkovModel& model, std::span<const double> grid, std::size_t initial_state,
                              std::mt19937_64& engine);

} // namespace taxhedge
