#include "taxhedge/mc_kernels.hpp"

#include <benchmark/benchmark.h>

using namespace taxhedge;

namespace {

ContractSpec reference() {
    const double horizon = 10.0;
    ContractSpec c;
    c.vasicek = VasicekParams{0.1, 0.03, 0.01, 0.02};
    c.markov = MarkovModel(2, horizon);
    c.markov.set_intensity(0, 1, PiecewiseConstant::constant(0.01, 0.0, horizon));
    c.payments = PaymentSpec::zero(2);
    c.payments.sojourn[0] = PiecewiseConstant::constant(-0.008, 0.0, horizon);
    c.payments.transition_payment(0, 1) = PiecewiseConstant::constant(1.0, 0.0, horizon);
    c.tax_expense = TaxExpenseSpec::none(2);
    c.tax_expense.gamma = 0.153;
    c.tax_expense.expense_rates[0] = PiecewiseConstant::constant(0.005, 0.0, horizon);
    return c;
}

const PathValuator& valuator() {
    static const PathValuator v(reference(), TimeGrid::uniform(10.0, 250), NumericsConfig{});
    return v;
}

void batch(benchmark::State& state, Execution exec) {
    const BatchConfig cfg{static_cast<std::size_t>(state.range(0)), 1, standard_perturbations(20, 1, 0.5)};
    for (auto _ : state) benchmark::DoNotOptimize(run_batch(valuator(), cfg, exec).cost_change.data());
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void surface(benchmark::State& state, Execution exec) {
    const TimeGrid grid = TimeGrid::uniform(10.0, static_cast<std::size_t>(state.range(0)));
    const ContractSpec c = reference();
    for (auto _ : state) benchmark::DoNotOptimize(HedgeSurface(c, grid.times, NumericsConfig{}, exec).size());
}

void reserves(benchmark::State& state, Execution exec) {
    const ContractSpec c = reference();
    std::vector<double> times, rates;
    for (int k = 0; k <= state.range(0); ++k) {
        times.push_back(10.0 * k / static_cast<double>(state.range(0)));
        rates.push_back(0.02);
    }
    for (auto _ : state) benchmark::DoNotOptimize(reserve_curve(c, times, rates, {}, exec).values.data());
}

} // namespace

BENCHMARK_CAPTURE(batch, serial, Execution::serial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(batch, parallel, Execution::parallel)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(surface, serial, Execution::serial)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(surface, parallel, Execution::parallel)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(reserves, serial, Execution::serial)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(reserves, parallel, Execution::parallel)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
