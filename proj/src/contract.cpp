#include "taxhedge/contract.hpp"

#include <algorithm>
#include <stdexcept>

namespace taxhedge {

std::vector<double> ContractSpec::breakpoints(double a, double b) const {
    std::vector<double> out = markov.breakpoints(a, b);
    payments.collect_breakpoints(a, b, out);
    for (const auto& f : tax_expense.expense_rates) f.collect_breakpoints(a, b, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void ContractSpec::validate() const {
    vasicek.validate();
    markov.validate();
    payments.validate(n_states());
    tax_expense.validate(n_states());
    if (initial_state >= n_states()) throw std::invalid_argument("initial state out of range");
}

} // namespace taxhedge
