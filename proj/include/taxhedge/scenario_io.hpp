#pragma once

#include "taxhedge/contract.hpp"
#include "taxhedge/execution.hpp"
#include "taxhedge/hedging.hpp"
#include "taxhedge/piecewise.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace taxhedge {

inline constexpr const char* version_string = "0.1.0";

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct StateFunction {
    std::size_t state = 0;
    std::vector<Segment> segments;
    bool operator==(const StateFunction&) const = default;
};

struct PairFunction {
    std::size_t from = 0;
    std::size_t to = 0;
    std::vector<Segment> segments;
    bool operator==(const PairFunction&) const = default;
};

struct ScenarioConfig {
    double horizon = 0.0;
    VasicekParams vasicek;
    std::vector<std::string> states;
    std::size_t initial_state = 0;
    std::vector<PairFunction> intensities;
    double initial_premium = 0.0;
    std::vector<StateFunction> sojourn_payments;
    std::vector<PairFunction> transition_payments;
    double gamma = 0.0;
    std::vector<StateFunction> expenses;
    std::size_t grid_steps = 1000;
    std::size_t report_every = 10;
    NumericsConfig numerics;
    std::size_t paths = 100000;
    std::uint64_t seed = 1;
    std::size_t illustration_paths = 3;
    std::size_t random_perturbations = 20;
    std::vector<std::string> outputs{"reserve_curve", "strategy_path", "risk_report", "two_step_report"};
    std::vector<double> reserve_rates;

    bool operator==(const ScenarioConfig&) const = default;
    bool wants(std::string_view output) const;
    ContractSpec contract() const;
};

// Parses and validates; throws ValidationError listing every problem found.
ScenarioConfig parse_scenario(std::string_view text);
std::string serialize_scenario(const ScenarioConfig& config);
// SHA-256 of the canonical serialization, lowercase hex.
std::string config_hash(const ScenarioConfig& config);

using Cell = std::variant<double, long long, std::string>;

// Rectangular table, time column first. Doubles are written with 17
// significant digits; CSV follows RFC 4180 (CRLF, quoted when needed). A
// table holding non-finite values gets a trailing 0/1 "finite" column.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
    bool all_finite() const;
    std::string to_csv() const;
};

ResultTable run_reserves(const ScenarioConfig& config, Execution exec = Execution::parallel);

struct HedgeReport {
    ResultTable paths;          // illustration paths
    ResultTable risk;           // aggregate estimates
    ResultTable perturbations;  // optimal row first
    bool perturbations_passed = true;
};

HedgeReport run_hedge_report(const ScenarioConfig& config, Execution exec = Execution::parallel);

ResultTable run_two_step(const ScenarioConfig& config, Execution exec = Execution::parallel);

std::string manifest_json(const ScenarioConfig& config, std::string_view command,
                          const std::vector<std::string>& files);

} // namespace taxhedge
