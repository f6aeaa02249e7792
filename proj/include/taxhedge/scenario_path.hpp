#pragma once

#include "taxhedge/markov_engine.hpp"

#include <cstddef>
#include <vector>

namespace taxhedge {

struct TimeGrid {
    std::vector<double> times;

    static TimeGrid uniform(double horizon, std::size_t steps);
    std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
    double horizon() const { return times.back(); }
    // strictly increasing, starting at 0
    void validate() const;
};

// One joint trajectory. Nodes are the grid times merged with the jump times of
// Z; every vector below is indexed by node. States are Z(t_n) after any jump at
// t_n, so Z is constant on each open interval (t_{n-1}, t_n) with value states[n-1].
struct ScenarioPath {
    std::vector<double> times;
    std::vector<long> grid_index;  // -1 for inserted jump nodes
    std::vector<double> rates;
    std::vector<double> brownian_increments;  // W(t_n) - W(t_{n-1}); 0 at n = 0
    std::vector<double> accumulated_rate;     // int_0^{t_n} r
    std::vector<std::size_t> states;
    std::vector<JumpRecord> jumps;
    std::vector<long> jump_at;  // index into jumps or -1
    std::vector<double> bond_prices;        // S1 = F(t, r, T)
    std::vector<double> savings;            // S0
    std::vector<double> after_tax_savings;  // S0 check
    std::vector<double> after_tax_bond;     // S1 check
    std::vector<double> accumulated_expense_rate;  // int_0^{t_n} delta_{Z(u)}(u) du

    std::size_t size() const { return times.size(); }
    std::size_t state_before(std::size_t n) const { return n == 0 ? states[0] : states[n - 1]; }
    bool is_jump(std::size_t n) const { return jump_at[n] >= 0; }
};

} // namespace taxhedge
