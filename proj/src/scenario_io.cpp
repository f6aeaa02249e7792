#include "taxhedge/scenario_io.hpp"

#include "taxhedge/market_sim.hpp"
#include "taxhedge/mc_kernels.hpp"
#include "taxhedge/rng.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace taxhedge {

using nlohmann::json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
    std::string out = "invalid scenario:";
    for (const auto& e : errors) out += "\n  " + e;
    return out;
}

const std::set<std::string> known_outputs{"reserve_curve", "strategy_path", "risk_report", "two_step_report"};

class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& message) { errors.push_back(path + ": " + message); }

    const json* member(const json& obj, const std::string& path, const char* key, bool required) {
        if (!obj.is_object()) return nullptr;
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) fail(path.empty() ? key : path + "." + key, "required field is missing");
            return nullptr;
        }
        return &*it;
    }

    void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!obj.is_object()) return;
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
                fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
        }
    }

    bool number(const json* v, const std::string& path, double& out) {
        if (!v) return false;
        if (!v->is_number()) {
            fail(path, "expected a number");
            return false;
        }
        out = v->get<double>();
        if (!std::isfinite(out)) {
            fail(path, "must be finite");
            return false;
        }
        return true;
    }

    template <class Int>
    bool integer(const json* v, const std::string& path, Int& out, Int minimum) {
        if (!v) return false;
        if (!v->is_number_integer() && !v->is_number_unsigned()) {
            fail(path, "expected an integer");
            return false;
        }
        if (v->is_number_unsigned()) {
            out = static_cast<Int>(v->get<std::uint64_t>());
        } else {
            const auto x = v->get<long long>();
            if (x < static_cast<long long>(minimum)) {
                fail(path, fmt::format("must be at least {}", minimum));
                return false;
            }
            out = static_cast<Int>(x);
        }
        if (out < minimum) {
            fail(path, fmt::format("must be at least {}", minimum));
            return false;
        }
        return true;
    }

    bool object(const json& v, const std::string& path) {
        if (!v.is_object()) {
            fail(path, "expected an object");
            return false;
        }
        return true;
    }

    bool array(const json& v, const std::string& path) {
        if (!v.is_array()) {
            fail(path, "expected an array");
            return false;
        }
        return true;
    }
};

std::size_t state_index(const std::vector<std::string>& states, const std::string& name) {
    auto it = std::find(states.begin(), states.end(), name);
    return it == states.end() ? states.size() : static_cast<std::size_t>(it - states.begin());
}

// Reads {"segments": [...]} or {"value": x} (constant on [0, T]).
std::vector<Segment> read_segments(Reader& rd, const json& entry, const std::string& path, double horizon,
                                   bool non_negative) {
    std::vector<Segment> out;
    const bool has_segments = entry.contains("segments");
    const bool has_value = entry.contains("value");
    if (has_segments == has_value) {
        rd.fail(path, "exactly one of \"segments\" or \"value\" is required");
        return out;
    }
    if (has_value) {
        double v = 0.0;
        if (rd.number(&entry["value"], path + ".value", v)) {
            if (non_negative && v < 0.0) rd.fail(path + ".value", "must be non-negative");
            if (horizon > 0.0) out.push_back(Segment{0.0, horizon, v});
        }
        return out;
    }
    const json& segs = entry["segments"];
    if (!rd.array(segs, path + ".segments")) return out;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::string sp = fmt::format("{}.segments[{}]", path, i);
        if (!rd.object(segs[i], sp)) continue;
        rd.check_keys(segs[i], sp, {"start", "end", "value"});
        Segment s;
        bool ok = rd.number(rd.member(segs[i], sp, "start", true), sp + ".start", s.start);
        ok = rd.number(rd.member(segs[i], sp, "end", true), sp + ".end", s.end) && ok;
        ok = rd.number(rd.member(segs[i], sp, "value", true), sp + ".value", s.value) && ok;
        if (!ok) continue;
        if (!(s.start < s.end)) {
            rd.fail(sp, fmt::format("segment start {} must be below its end {}", s.start, s.end));
            continue;
        }
        if (s.start < 0.0) rd.fail(sp, fmt::format("segment [{}, {}] starts before 0", s.start, s.end));
        if (horizon > 0.0 && s.end > horizon)
            rd.fail(sp, fmt::format("segment [{}, {}] ends after the horizon {}", s.start, s.end, horizon));
        if (non_negative && s.value < 0.0) rd.fail(sp + ".value", "must be non-negative");
        if (!out.empty() && s.start < out.back().end)
            rd.fail(sp, "segments must be sorted and non-overlapping (non-increasing breakpoint)");
        out.push_back(s);
    }
    return out;
}

void read_state_functions(Reader& rd, const json& root, const std::string& path, const std::vector<std::string>& states,
                          double horizon, bool non_negative, std::vector<StateFunction>& out) {
    if (!rd.array(root, path)) return;
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string ep = fmt::format("{}[{}]", path, i);
        if (!rd.object(root[i], ep)) continue;
        rd.check_keys(root[i], ep, {"state", "segments", "value"});
        const json* st = rd.member(root[i], ep, "state", true);
        if (!st) continue;
        if (!st->is_string()) {
            rd.fail(ep + ".state", "expected a state name");
            continue;
        }
        const std::size_t s = state_index(states, st->get<std::string>());
        if (s == states.size()) {
            rd.fail(ep + ".state", fmt::format("unknown state \"{}\"", st->get<std::string>()));
            read_segments(rd, root[i], ep, horizon, non_negative);
            continue;
        }
        if (!seen.insert(s).second) rd.fail(ep + ".state", "state listed twice");
        out.push_back(StateFunction{s, read_segments(rd, root[i], ep, horizon, non_negative)});
    }
}

void read_pair_functions(Reader& rd, const json& root, const std::string& path, const std::vector<std::string>& states,
                         double horizon, bool non_negative, std::vector<PairFunction>& out) {
    if (!rd.array(root, path)) return;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string ep = fmt::format("{}[{}]", path, i);
        if (!rd.object(root[i], ep)) continue;
        rd.check_keys(root[i], ep, {"from", "to", "segments", "value"});
        const json* from = rd.member(root[i], ep, "from", true);
        const json* to = rd.member(root[i], ep, "to", true);
        if (!from || !to) continue;
        if (!from->is_string() || !to->is_string()) {
            rd.fail(ep, "from and to must be state names");
            continue;
        }
        const std::size_t f = state_index(states, from->get<std::string>());
        const std::size_t t = state_index(states, to->get<std::string>());
        bool ok = true;
        if (f == states.size()) {
            rd.fail(ep + ".from", fmt::format("unknown state \"{}\"", from->get<std::string>()));
            ok = false;
        }
        if (t == states.size()) {
            rd.fail(ep + ".to", fmt::format("unknown state \"{}\"", to->get<std::string>()));
            ok = false;
        }
        if (!ok) {
            read_segments(rd, root[i], ep, horizon, non_negative);
            continue;
        }
        if (f == t) {
            rd.fail(ep, "from and to must differ");
            continue;
        }
        if (!seen.insert({f, t}).second) rd.fail(ep, "transition listed twice");
        out.push_back(PairFunction{f, t, read_segments(rd, root[i], ep, horizon, non_negative)});
    }
}

json segments_json(const std::vector<Segment>& segs) {
    json a = json::array();
    for (const Segment& s : segs) a.push_back({{"start", s.start}, {"end", s.end}, {"value", s.value}});
    return a;
}

} // namespace

ValidationError::ValidationError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

bool ScenarioConfig::wants(std::string_view output) const {
    return std::find(outputs.begin(), outputs.end(), output) != outputs.end();
}

ScenarioConfig parse_scenario(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError({std::string("document: ") + e.what()});
    }
    Reader rd;
    ScenarioConfig c;
    if (!root.is_object()) throw ValidationError({"document: expected a JSON object"});
    rd.check_keys(root, "", {"horizon", "vasicek", "states", "initial_state", "intensities", "payments", "tax_expense",
                             "grid", "quadrature", "monte_carlo", "outputs", "reserve_rates"});

    if (rd.number(rd.member(root, "", "horizon", true), "horizon", c.horizon) && !(c.horizon > 0.0))
        rd.fail("horizon", "must be positive");

    if (const json* v = rd.member(root, "", "vasicek", true); v && rd.object(*v, "vasicek")) {
        rd.check_keys(*v, "vasicek", {"kappa", "theta", "sigma", "r0"});
        rd.number(rd.member(*v, "vasicek", "kappa", true), "vasicek.kappa", c.vasicek.kappa);
        rd.number(rd.member(*v, "vasicek", "theta", true), "vasicek.theta", c.vasicek.theta);
        rd.number(rd.member(*v, "vasicek", "sigma", true), "vasicek.sigma", c.vasicek.sigma);
        rd.number(rd.member(*v, "vasicek", "r0", true), "vasicek.r0", c.vasicek.r0);
        if (!(c.vasicek.kappa > 0.0)) rd.fail("vasicek.kappa", "must be positive");
        if (c.vasicek.sigma < 0.0) rd.fail("vasicek.sigma", "must be non-negative");
    }

    if (const json* s = rd.member(root, "", "states", true); s && rd.array(*s, "states")) {
        for (std::size_t i = 0; i < s->size(); ++i) {
            if (!(*s)[i].is_string() || (*s)[i].get<std::string>().empty()) {
                rd.fail(fmt::format("states[{}]", i), "expected a non-empty state name");
                continue;
            }
            const auto name = (*s)[i].get<std::string>();
            if (state_index(c.states, name) != c.states.size())
                rd.fail(fmt::format("states[{}]", i), fmt::format("duplicate state \"{}\"", name));
            c.states.push_back(name);
        }
        if (c.states.empty()) rd.fail("states", "at least one state is required");
    }

    if (const json* init = rd.member(root, "", "initial_state", false)) {
        if (!init->is_string()) {
            rd.fail("initial_state", "expected a state name");
        } else {
            c.initial_state = state_index(c.states, init->get<std::string>());
            if (c.initial_state == c.states.size() && !c.states.empty())
                rd.fail("initial_state", fmt::format("unknown state \"{}\"", init->get<std::string>()));
        }
    }

    const double horizon = c.horizon > 0.0 ? c.horizon : 0.0;
    if (const json* in = rd.member(root, "", "intensities", false))
        read_pair_functions(rd, *in, "intensities", c.states, horizon, true, c.intensities);

    if (const json* p = rd.member(root, "", "payments", false); p && rd.object(*p, "payments")) {
        rd.check_keys(*p, "payments", {"initial_premium", "sojourn", "transition"});
        if (const json* ip = rd.member(*p, "payments", "initial_premium", false))
            rd.number(ip, "payments.initial_premium", c.initial_premium);
        if (const json* so = rd.member(*p, "payments", "sojourn", false))
            read_state_functions(rd, *so, "payments.sojourn", c.states, horizon, false, c.sojourn_payments);
        if (const json* tr = rd.member(*p, "payments", "transition", false))
            read_pair_functions(rd, *tr, "payments.transition", c.states, horizon, false, c.transition_payments);
    }

    if (const json* te = rd.member(root, "", "tax_expense", false); te && rd.object(*te, "tax_expense")) {
        rd.check_keys(*te, "tax_expense", {"gamma", "expenses"});
        if (const json* g = rd.member(*te, "tax_expense", "gamma", false);
            g && rd.number(g, "tax_expense.gamma", c.gamma) && !(c.gamma >= 0.0 && c.gamma < 1.0))
            rd.fail("tax_expense.gamma", "gamma must lie in [0,1)");
        if (const json* ex = rd.member(*te, "tax_expense", "expenses", false))
            read_state_functions(rd, *ex, "tax_expense.expenses", c.states, horizon, true, c.expenses);
    }

    if (const json* g = rd.member(root, "", "grid", false); g && rd.object(*g, "grid")) {
        rd.check_keys(*g, "grid", {"steps", "report_every"});
        rd.integer(rd.member(*g, "grid", "steps", false), "grid.steps", c.grid_steps, std::size_t{1});
        rd.integer(rd.member(*g, "grid", "report_every", false), "grid.report_every", c.report_every, std::size_t{1});
    }
    if (const json* q = rd.member(root, "", "quadrature", false); q && rd.object(*q, "quadrature")) {
        rd.check_keys(*q, "quadrature", {"nodes", "ode_substeps", "chebyshev_nodes"});
        rd.integer(rd.member(*q, "quadrature", "nodes", false), "quadrature.nodes", c.numerics.quad_intervals,
                   std::size_t{2});
        rd.integer(rd.member(*q, "quadrature", "ode_substeps", false), "quadrature.ode_substeps",
                   c.numerics.ode_substeps, std::size_t{1});
        rd.integer(rd.member(*q, "quadrature", "chebyshev_nodes", false), "quadrature.chebyshev_nodes",
                   c.numerics.chebyshev_nodes, std::size_t{4});
    }
    if (const json* m = rd.member(root, "", "monte_carlo", false); m && rd.object(*m, "monte_carlo")) {
        rd.check_keys(*m, "monte_carlo", {"paths", "seed", "illustration_paths", "random_perturbations"});
        rd.integer(rd.member(*m, "monte_carlo", "paths", false), "monte_carlo.paths", c.paths, std::size_t{2});
        rd.integer(rd.member(*m, "monte_carlo", "seed", false), "monte_carlo.seed", c.seed, std::uint64_t{0});
        rd.integer(rd.member(*m, "monte_carlo", "illustration_paths", false), "monte_carlo.illustration_paths",
                   c.illustration_paths, std::size_t{0});
        rd.integer(rd.member(*m, "monte_carlo", "random_perturbations", false), "monte_carlo.random_perturbations",
                   c.random_perturbations, std::size_t{0});
    }
    if (const json* o = rd.member(root, "", "outputs", false); o && rd.array(*o, "outputs")) {
        c.outputs.clear();
        for (std::size_t i = 0; i < o->size(); ++i) {
            const std::string op = fmt::format("outputs[{}]", i);
            if (!(*o)[i].is_string() || !known_outputs.count((*o)[i].get<std::string>())) {
                rd.fail(op, "expected one of reserve_curve, strategy_path, risk_report, two_step_report");
                continue;
            }
            c.outputs.push_back((*o)[i].get<std::string>());
        }
    }
    if (const json* rr = rd.member(root, "", "reserve_rates", false); rr && rd.array(*rr, "reserve_rates")) {
        for (std::size_t i = 0; i < rr->size(); ++i) {
            double x = 0.0;
            if (rd.number(&(*rr)[i], fmt::format("reserve_rates[{}]", i), x)) c.reserve_rates.push_back(x);
        }
    }

    if (!rd.errors.empty()) throw ValidationError(std::move(rd.errors));
    return c;
}

std::string serialize_scenario(const ScenarioConfig& c) {
    json root;
    root["horizon"] = c.horizon;
    root["vasicek"] = {{"kappa", c.vasicek.kappa}, {"theta", c.vasicek.theta}, {"sigma", c.vasicek.sigma},
                       {"r0", c.vasicek.r0}};
    root["states"] = c.states;
    root["initial_state"] = c.states.at(c.initial_state);
    json in = json::array();
    for (const auto& f : c.intensities)
        in.push_back({{"from", c.states[f.from]}, {"to", c.states[f.to]}, {"segments", segments_json(f.segments)}});
    root["intensities"] = in;
    json so = json::array();
    for (const auto& f : c.sojourn_payments)
        so.push_back({{"state", c.states[f.state]}, {"segments", segments_json(f.segments)}});
    json tr = json::array();
    for (const auto& f : c.transition_payments)
        tr.push_back({{"from", c.states[f.from]}, {"to", c.states[f.to]}, {"segments", segments_json(f.segments)}});
    root["payments"] = {{"initial_premium", c.initial_premium}, {"sojourn", so}, {"transition", tr}};
    json ex = json::array();
    for (const auto& f : c.expenses) ex.push_back({{"state", c.states[f.state]}, {"segments", segments_json(f.segments)}});
    root["tax_expense"] = {{"gamma", c.gamma}, {"expenses", ex}};
    root["grid"] = {{"steps", c.grid_steps}, {"report_every", c.report_every}};
    root["quadrature"] = {{"nodes", c.numerics.quad_intervals},
                          {"ode_substeps", c.numerics.ode_substeps},
                          {"chebyshev_nodes", c.numerics.chebyshev_nodes}};
    root["monte_carlo"] = {{"paths", c.paths},
                           {"seed", c.seed},
                           {"illustration_paths", c.illustration_paths},
                           {"random_perturbations", c.random_perturbations}};
    root["outputs"] = c.outputs;
    root["reserve_rates"] = c.reserve_rates;
    return root.dump(2) + "\n";
}

std::string config_hash(const ScenarioConfig& config) {
    const std::string text = serialize_scenario(config);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

ContractSpec ScenarioConfig::contract() const {
    const std::size_t n = states.size();
    ContractSpec spec;
    spec.vasicek = vasicek;
    spec.markov = MarkovModel(n, horizon);
    for (const auto& f : intensities) spec.markov.set_intensity(f.from, f.to, PiecewiseConstant(f.segments));
    spec.payments = PaymentSpec::zero(n);
    spec.payments.initial_premium = initial_premium;
    for (const auto& f : sojourn_payments) spec.payments.sojourn[f.state] = PiecewiseConstant(f.segments);
    for (const auto& f : transition_payments)
        spec.payments.transition_payment(f.from, f.to) = PiecewiseConstant(f.segments);
    spec.tax_expense = TaxExpenseSpec::none(n);
    spec.tax_expense.gamma = gamma;
    for (const auto& f : expenses) spec.tax_expense.expense_rates[f.state] = PiecewiseConstant(f.segments);
    spec.initial_state = initial_state;
    spec.validate();
    return spec;
}

void ResultTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
        throw std::invalid_argument(fmt::format("row has {} cells, table has {} columns", row.size(), columns.size()));
    rows.push_back(std::move(row));
}

bool ResultTable::all_finite() const {
    for (const auto& row : rows)
        for (const auto& cell : row)
            if (const double* d = std::get_if<double>(&cell); d && !std::isfinite(*d)) return false;
    return true;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string cell_text(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return fmt::format("{:.17g}", *d);
    if (const long long* i = std::get_if<long long>(&c)) return fmt::format("{}", *i);
    return csv_field(std::get<std::string>(c));
}

} // namespace

std::string ResultTable::to_csv() const {
    const bool flag = !all_finite();
    std::string out;
    for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + csv_field(columns[j]);
    out += flag ? ",finite\r\n" : "\r\n";
    for (const auto& row : rows) {
        bool finite = true;
        for (std::size_t j = 0; j < row.size(); ++j) {
            out += (j ? "," : "") + cell_text(row[j]);
            if (const double* d = std::get_if<double>(&row[j]); d && !std::isfinite(*d)) finite = false;
        }
        if (flag) out += finite ? ",1" : ",0";
        out += "\r\n";
    }
    return out;
}

ResultTable run_reserves(const ScenarioConfig& config, Execution exec) {
    const ContractSpec spec = config.contract();
    const TimeGrid grid = TimeGrid::uniform(config.horizon, config.grid_steps);
    std::vector<double> times;
    for (std::size_t k = 0; k < grid.times.size(); k += config.report_every) times.push_back(grid.times[k]);
    if (times.back() != grid.times.back()) times.push_back(grid.times.back());

    ResultTable table;
    table.columns = {"t", "scenario", "r"};
    for (const auto& s : config.states) table.columns.push_back("V_" + s);

    std::vector<std::string> labels{"mean"};
    std::vector<std::vector<double>> rate_sets(1);
    for (double t : times) rate_sets[0].push_back(ou_mean(spec.vasicek, spec.vasicek.r0, t));
    for (std::size_t i = 0; i < config.reserve_rates.size(); ++i) {
        labels.push_back(fmt::format("rate_{}", i));
        rate_sets.emplace_back(times.size(), config.reserve_rates[i]);
    }
    for (std::size_t sc = 0; sc < rate_sets.size(); ++sc) {
        const ReserveCurve curve = reserve_curve(spec, times, rate_sets[sc], config.numerics, exec);
        for (std::size_t k = 0; k < times.size(); ++k) {
            std::vector<Cell> row{times[k], labels[sc], rate_sets[sc][k]};
            for (double v : curve.values[k]) row.emplace_back(v);
            table.add_row(std::move(row));
        }
    }
    return table;
}

HedgeReport run_hedge_report(const ScenarioConfig& config, Execution exec) {
    const ContractSpec spec = config.contract();
    const TimeGrid grid = TimeGrid::uniform(config.horizon, config.grid_steps);
    const PathValuator valuator(spec, grid, config.numerics, exec);
    HedgeReport rep;

    rep.paths.columns = {"t", "path", "node", "r", "Z", "S0", "S1", "h0", "h1", "V", "dC_tilde"};
    if (config.wants("strategy_path")) {
        const OptimalStrategy optimal;
        for (std::size_t i = 0; i < std::min(config.illustration_paths, config.paths); ++i) {
            const ScenarioPath path = simulate_scenario(spec, grid, derive_seed(config.seed, streams::path, i));
            const PathValuation val = valuator.value(path);
            const CostDiagnostics d = run_strategy(spec, path, val, optimal);
            for (std::size_t k = 0; k < path.size(); ++k) {
                const double dc = k == 0 ? d.modified_cost[0] : d.modified_cost[k] - d.modified_cost[k - 1];
                rep.paths.add_row({path.times[k], static_cast<long long>(i), static_cast<long long>(k), path.rates[k],
                                   config.states[path.states[k]], path.savings[k], path.bond_prices[k],
                                   d.holdings[k].h0, d.holdings[k].h1, d.holdings[k].value, dc});
            }
        }
    }

    rep.risk.columns = {"metric", "estimate", "std_error", "paths"};
    rep.perturbations.columns = {"label", "risk", "std_error", "excess", "excess_std_error", "bound", "passed"};
    if (config.wants("risk_report")) {
        const StrategyPoint at0 = optimal_strategy(spec, spec.initial_state, spec.initial_state, 0.0, spec.vasicek.r0,
                                                   0.0, config.numerics);
        const double unit = std::max(std::abs(at0.h1), 1e-3);
        BatchConfig bc{config.paths, config.seed, standard_perturbations(config.random_perturbations, config.seed, unit)};
        const BatchOutcome out = run_batch(valuator, bc, exec);
        const RiskReport r = summarize(out, bc.perturbations);
        const auto n = static_cast<long long>(r.n_paths);
        auto metric = [&](const char* name, const Estimate& e) { rep.risk.add_row({name, e.mean, e.std_error, n}); };
        metric("mean_cost_change", r.mean_change);
        metric("modified_risk", r.risk);
        metric("residual_risk", r.residual_risk);
        metric("risk_minus_residual", r.risk_gap);
        metric("discounted_bond_change", r.bond_martingale);
        metric("after_tax_discounted_bond_change", r.after_tax_bond_martingale);
        metric("residual_bond_covariance", r.residual_bond_covariance);
        rep.perturbations.add_row({"optimal", r.risk.mean, r.risk.std_error, 0.0, 0.0, 0.0, 1LL});
        for (const auto& p : r.perturbations) {
            rep.perturbations.add_row({p.label, p.risk.mean, p.risk.std_error, p.excess.mean, p.excess.std_error,
                                       p.bound, static_cast<long long>(p.passed)});
            rep.perturbations_passed = rep.perturbations_passed && p.passed;
        }
    }
    return rep;
}

ResultTable run_two_step(const ScenarioConfig& config, Execution exec) {
    const ContractSpec spec = config.contract();
    const TimeGrid grid = TimeGrid::uniform(config.horizon, config.grid_steps);
    const TwoStepReport r = two_step_check(spec, grid, config.paths, config.seed, config.numerics, exec);
    ResultTable t;
    t.columns = {"quantity", "value", "std_error"};
    t.add_row({"discounted_total_payments", r.discounted_total.mean, r.discounted_total.std_error});
    t.add_row({"initial_payment_plus_reserve", r.intrinsic_value, 0.0});
    t.add_row({"gap", r.gap, r.discounted_total.std_error});
    t.add_row({"z_score", r.z_score, 0.0});
    t.add_row({"consistent", r.consistent ? 1.0 : 0.0, 0.0});
    return t;
}

std::string manifest_json(const ScenarioConfig& config, std::string_view command,
                          const std::vector<std::string>& files) {
    json m;
    m["version"] = version_string;
    m["command"] = std::string(command);
    m["config_sha256"] = config_hash(config);
    m["seed"] = config.seed;
    m["paths"] = config.paths;
    m["grid_steps"] = config.grid_steps;
    m["files"] = files;
    return m.dump(2) + "\n";
}

} // namespace taxhedge
