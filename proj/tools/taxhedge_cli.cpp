#include "taxhedge/scenario_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace taxhedge;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_invalid = 2;
constexpr int exit_numerical = 3;

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> grid;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError({"config: cannot open " + path});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig load(const Options& o) {
    ScenarioConfig c = parse_scenario(read_file(o.config));
    std::vector<std::string> errors;
    if (o.seed) c.seed = *o.seed;
    if (o.paths) {
        if (*o.paths < 2) errors.push_back("--paths: must be at least 2");
        c.paths = *o.paths;
    }
    if (o.grid) {
        if (*o.grid < 1) errors.push_back("--grid: must be at least 1");
        c.grid_steps = *o.grid;
    }
    if (!errors.empty()) throw ValidationError(errors);
    c.contract();
    return c;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

class Output {
public:
    explicit Output(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

    bool table(const std::string& name, const ResultTable& t) {
        write_file(dir_ / name, t.to_csv());
        files_.push_back(name);
        return t.all_finite();
    }

    void manifest(const ScenarioConfig& c, const std::string& command) {
        write_file(dir_ / "manifest.json", manifest_json(c, command, files_));
    }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

int numerical_failure(const std::string& what) {
    std::cerr << "non-finite values in " << what << "\n";
    return exit_numerical;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk-minimizing hedging of life-insurance payments under taxes and expenses"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "scenario JSON file")->required();
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--seed", o.seed, "master seed, overrides the config");
        sub->add_option("--paths", o.paths, "Monte Carlo path count, overrides the config");
        sub->add_option("--grid", o.grid, "time-grid steps, overrides the config");
    };
    CLI::App* reserves = app.add_subcommand("reserves", "state-wise reserve curves");
    CLI::App* hedge = app.add_subcommand("hedge", "strategy paths, risk estimate and perturbation table");
    CLI::App* two_step = app.add_subcommand("two-step", "two-step consistency check");
    CLI::App* validate = app.add_subcommand("validate", "validate a scenario file");
    for (CLI::App* sub : {reserves, hedge, two_step, validate}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_invalid;
    }

    try {
        const ScenarioConfig config = load(o);
        if (validate->parsed()) {
            std::cout << "valid\n";
            return exit_ok;
        }
        Output out(o.out);
        if (reserves->parsed()) {
            const bool finite = out.table("reserves.csv", run_reserves(config));
            out.manifest(config, "reserves");
            if (!finite) return numerical_failure("reserves.csv");
        } else if (hedge->parsed()) {
            const HedgeReport rep = run_hedge_report(config);
            bool finite = true;
            if (config.wants("strategy_path")) finite = out.table("hedge_paths.csv", rep.paths) && finite;
            if (config.wants("risk_report")) {
                finite = out.table("risk_report.csv", rep.risk) && finite;
                finite = out.table("perturbations.csv", rep.perturbations) && finite;
            }
            out.manifest(config, "hedge");
            if (!finite) return numerical_failure("hedge outputs");
        } else if (two_step->parsed()) {
            const bool finite = out.table("two_step.csv", run_two_step(config));
            out.manifest(config, "two-step");
            if (!finite) return numerical_failure("two_step.csv");
        }
        return exit_ok;
    } catch (const ValidationError& e) {
        for (const auto& err : e.errors()) std::cerr << err << "\n";
        return exit_invalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_failure;
    }
}
