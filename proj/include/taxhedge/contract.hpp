#pragma once

#include "taxhedge/cashflow.hpp"
#include "taxhedge/markov_engine.hpp"
#include "taxhedge/term_structure.hpp"

namespace taxhedge {

struct ContractSpec {
    VasicekParams vasicek;
    MarkovModel markov;
    PaymentSpec payments;
    TaxExpenseSpec tax_expense;
    std::size_t initial_state = 0;

    double horizon() const { return markov.horizon(); }
    std::size_t n_states() const { return markov.n_states(); }

    // Union of intensity, payment and expense breakpoints inside (a, b).
    std::vector<double> breakpoints(double a, double b) const;

    void validate() const;
};

} // namespace taxhedge
