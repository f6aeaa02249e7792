#include "taxhedge/markov_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace taxhedge {

MarkovModel::MarkovModel(std::size_t n_states, double horizon)
    : n_(n_states), horizon_(horizon), mu_(n_states * n_states) {
    if (n_states == 0) throw std::invalid_argument("a Markov model needs at least one state");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
}

void MarkovModel::set_intensity(std::size_t from, std::size_t to, PiecewiseConstant mu) {
    if (from >= n_ || to >= n_) throw std::out_of_range("state index out of range");
    if (from == to) throw std::invalid_argument("diagonal intensities are derived, not set");
    if (mu.min_value() < 0.0) throw std::invalid_argument("transition intensities must be non-negative");
    mu_[from * n_ + to] = std::move(mu);
}

bool MarkovModel::has_transition(std::size_t from, std::size_t to) const {
    return from != to && !intensity(from, to).is_zero();
}

double MarkovModel::exit_rate(std::size_t from, double t) const {
    double total = 0.0;
    for (std::size_t k = 0; k < n_; ++k)
        if (k != from) total += rate(from, k, t);
    return total;
}

double MarkovModel::exit_rate_bound(std::size_t from) const {
    // Evaluate the exit rate on every piece of the common refinement.
    std::vector<double> cuts = breakpoints(0.0, horizon_);
    cuts.insert(cuts.begin(), 0.0);
    cuts.push_back(horizon_);
    double bound = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        bound = std::max(bound, exit_rate(from, 0.5 * (cuts[i] + cuts[i + 1])));
    return bound;
}

Eigen::MatrixXd MarkovModel::generator(double t) const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < n_; ++j) {
        double diag = 0.0;
        for (std::size_t k = 0; k < n_; ++k) {
            if (k == j) continue;
            const double m = rate(j, k, t);
            g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = m;
            diag -= m;
        }
        g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = diag;
    }
    return g;
}

std::vector<double> MarkovModel::breakpoints(double a, double b) const {
    std::vector<double> out;
    for (const auto& mu : mu_) mu.collect_breakpoints(a, b, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void MarkovModel::validate() const {
    for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = 0; k < n_; ++k) {
            if (j == k) continue;
            for (const Segment& s : intensity(j, k).segments()) {
                if (s.start < 0.0 || s.end > horizon_)
                    throw std::invalid_argument("intensity " + std::to_string(j) + "->" + std::to_string(k) +
                                                " has a segment outside [0, horizon]");
            }
        }
}

DeflationSpec DeflationSpec::zero(std::size_t n_states) { return DeflationSpec{std::vector<PiecewiseConstant>(n_states)}; }

DeflationSpec DeflationSpec::negated() const {
    DeflationSpec out;
    out.state_rates.reserve(state_rates.size());
    for (const auto& f : state_rates) out.state_rates.push_back(f.scaled(-1.0));
    return out;
}

void DeflationSpec::collect_breakpoints(double a, double b, std::vector<double>& out) const {
    for (const auto& f : state_rates) f.collect_breakpoints(a, b, out);
}

namespace {

void check_interval(const MarkovModel& model, const DeflationSpec& deflation, double t, double s) {
    if (!std::isfinite(t) || !std::isfinite(s)) throw std::invalid_argument("times must be finite");
    if (s < t) throw std::invalid_argument("s must not precede t");
    if (deflation.state_rates.size() != model.n_states())
        throw std::invalid_argument("deflation spec must have one rate per state");
}

// mu - diag(delta) at time u
Eigen::MatrixXd drift_matrix(const MarkovModel& model, const DeflationSpec& deflation, double u) {
    Eigen::MatrixXd g = model.generator(u);
    for (std::size_t j = 0; j < model.n_states(); ++j)
        g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) -= deflation.rate(j, u);
    return g;
}

// Sub-intervals of [a, b]: `steps` uniform pieces, each split at breakpoints.
// Coefficients are constant on every returned piece.
template <class Visit>
void for_each_piece(const MarkovModel& model, const DeflationSpec& deflation, double a, double b,
                    std::size_t steps, Visit&& visit) {
    if (b <= a) return;
    std::vector<double> cuts = model.breakpoints(a, b);
    deflation.collect_breakpoints(a, b, cuts);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double h = (b - a) / static_cast<double>(steps);
    auto cut = cuts.begin();
    for (std::size_t i = 0; i < steps; ++i) {
        double lo = a + h * static_cast<double>(i);
        const double hi = (i + 1 == steps) ? b : a + h * static_cast<double>(i + 1);
        while (cut != cuts.end() && *cut <= lo) ++cut;
        while (cut != cuts.end() && *cut < hi) {
            visit(lo, *cut);
            lo = *cut;
            ++cut;
        }
        visit(lo, hi);
    }
}

// One classical RK4 step of P' = P G with G constant over the step.
void rk4_right(Eigen::MatrixXd& p, const Eigen::MatrixXd& g, double h) {
    const Eigen::MatrixXd k1 = p * g;
    const Eigen::MatrixXd k2 = (p + 0.5 * h * k1) * g;
    const Eigen::MatrixXd k3 = (p + 0.5 * h * k2) * g;
    const Eigen::MatrixXd k4 = (p + h * k3) * g;
    p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// One RK4 step of P' = G P taken in reversed time (from the right end to the left).
void rk4_left(Eigen::MatrixXd& p, const Eigen::MatrixXd& g, double h) {
    const Eigen::MatrixXd k1 = g * p;
    const Eigen::MatrixXd k2 = g * (p + 0.5 * h * k1);
    const Eigen::MatrixXd k3 = g * (p + 0.5 * h * k2);
    const Eigen::MatrixXd k4 = g * (p + h * k3);
    p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void integrate_forward(const MarkovModel& model, const DeflationSpec& deflation, double a, double b,
                       std::size_t steps, Eigen::MatrixXd& p) {
    for_each_piece(model, deflation, a, b, steps, [&](double lo, double hi) {
        const Eigen::MatrixXd g = drift_matrix(model, deflation, 0.5 * (lo + hi));
        rk4_right(p, g, hi - lo);
    });
}

} // namespace

TransitionMatrix deflated_transitions_forward(const MarkovModel& model, const DeflationSpec& deflation, double t,
                                              double s, std::size_t steps) {
    check_interval(model, deflation, t, s);
    if (steps == 0) throw std::invalid_argument("steps must be positive");
    const auto n = static_cast<Eigen::Index>(model.n_states());
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    integrate_forward(model, deflation, t, s, steps, p);
    return TransitionMatrix{std::move(p), t, s};
}

TransitionMatrix deflated_transitions_backward(const MarkovModel& model, const DeflationSpec& deflation, double t,
                                               double s, std::size_t steps) {
    check_interval(model, deflation, t, s);
    if (steps == 0) throw std::invalid_argument("steps must be positive");
    const auto n = static_cast<Eigen::Index>(model.n_states());
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    // Collect the pieces left to right, then step through them from s back to t.
    std::vector<std::pair<double, double>> pieces;
    for_each_piece(model, deflation, t, s, steps, [&](double lo, double hi) { pieces.emplace_back(lo, hi); });
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
        const Eigen::MatrixXd g = drift_matrix(model, deflation, 0.5 * (it->first + it->second));
        rk4_left(p, g, it->second - it->first);
    }
    return TransitionMatrix{std::move(p), t, s};
}

std::vector<Eigen::MatrixXd> deflated_transitions_sweep(const MarkovModel& model, const DeflationSpec& deflation,
                                                        double t, std::span<const double> nodes,
                                                        std::size_t steps_per_interval) {
    if (steps_per_interval == 0) throw std::invalid_argument("steps must be positive");
    const auto n = static_cast<Eigen::Index>(model.n_states());
    std::vector<Eigen::MatrixXd> out;
    out.reserve(nodes.size());
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    double prev = t;
    for (double s : nodes) {
        check_interval(model, deflation, prev, s);
        integrate_forward(model, deflation, prev, s, steps_per_interval, p);
        out.push_back(p);
        prev = s;
    }
    return out;
}

StatePath simulate_state_path(const MarkovModel& model, std::span<const double> grid, std::size_t initial_state,
                              std::mt19937_64& engine) {
    const std::size_t n = model.n_states();
    if (initial_state >= n) throw std::invalid_argument("invalid initial state");
    if (grid.empty()) throw std::invalid_argument("time grid must not be empty");
    std::vector<double> bounds(n);
    for (std::size_t j = 0; j < n; ++j) bounds[j] = model.exit_rate_bound(j);

    StatePath path;
    path.states.resize(grid.size());
    std::exponential_distribution<double> unit_exp(1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const double end = grid.back();
    double t = grid.front();
    std::size_t state = initial_state;
    std::size_t next_grid = 0;
    auto record_until = [&](double limit) {
        while (next_grid < grid.size() && grid[next_grid] < limit) path.states[next_grid++] = state;
    };

    while (true) {
        const double bound = bounds[state];
        if (bound <= 0.0) break;
        const double candidate = t + unit_exp(engine) / bound;
        if (candidate >= end) break;
        t = candidate;
        const double total = model.exit_rate(state, t);
        // thinning: accept with probability total / bound
        const double u = uniform(engine) * bound;
        if (u >= total) continue;
        // pick the destination proportionally to mu_jk(t)
        double acc = 0.0;
        std::size_t dest = state;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == state) continue;
            acc += model.rate(state, k, t);
            if (u < acc) {
                dest = k;
                break;
            }
        }
        if (dest == state) {  // rounding at the upper edge
            for (std::size_t k = n; k-- > 0;)
                if (k != state && model.rate(state, k, t) > 0.0) {
                    dest = k;
                    break;
                }
        }
        record_until(t);
        path.jumps.push_back(JumpRecord{t, state, dest});
        state = dest;
    }
    record_until(std::numeric_limits<double>::infinity());
    return path;
}

StatePath simulate_state_path(const MarkovModel& model, std::span<const double> grid, std::size_t initial_state,
                              std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    return simulate_state_path(model, grid, initial_state, engine);
}

} // namespace taxhedge
