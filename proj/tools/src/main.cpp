#include <iostream>

#include <CLI11.hpp>

#include <iiss/errors.hpp>

#include "commands.hpp"

using iiss::cli::RunConfig;

namespace {

void add_tolerances(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--tol-abs", cfg.tol_abs, "Integrator absolute tolerance")->capture_default_str();
    cmd->add_option("--tol-rel", cfg.tol_rel, "Integrator relative tolerance")->capture_default_str();
    cmd->add_option("--cert-abs", cfg.cert_abs, "Absolute slack allowed in checks")->capture_default_str();
    cmd->add_option("--cert-rel", cfg.cert_rel, "Slack allowed per unit of |LHS|")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    cmd->add_option("--out", cfg.out, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability estimate toolkit: simulation, estimate checks and comparison-function constructions"};
    app.set_version_flag("--version", IISS_VERSION);
    app.require_subcommand(1);

    RunConfig cfg;
    std::string construction;

    auto* simulate = app.add_subcommand("simulate", "Simulate a system and write its trajectory");
    simulate->add_option("--system", cfg.system, "System file")->required();
    simulate->add_option("--input", cfg.input, "Piecewise-constant input file (default: zero)");
    simulate->add_option("--xi", cfg.xi, "Initial state, comma separated");
    simulate->add_option("--horizon", cfg.horizon, "Final time")->capture_default_str();
    add_tolerances(simulate, cfg);

    auto* check = app.add_subcommand("check", "Check an estimate along one trajectory");
    check->add_option("--system", cfg.system, "System file")->required();
    check->add_option("--spec", cfg.spec, "Estimate spec file")->required();
    check->add_option("--input", cfg.input, "Piecewise-constant input file (default: zero)");
    check->add_option("--xi", cfg.xi, "Initial state, comma separated");
    check->add_option("--horizon", cfg.horizon, "Final time")->capture_default_str();
    check->add_option("--witness", cfg.witness, "Replay a witness file (sets xi, input and horizon)");
    add_tolerances(check, cfg);

    auto* falsify = app.add_subcommand("falsify", "Search for a trajectory violating an estimate");
    falsify->add_option("--system", cfg.system, "System file")->required();
    falsify->add_option("--spec", cfg.spec, "Estimate spec file")->required();
    falsify->add_option("--horizon", cfg.horizon, "Final time")->capture_default_str();
    falsify->add_option("--state-radius", cfg.state_radius, "Bound on |xi|")->capture_default_str();
    falsify->add_option("--input-radius", cfg.input_radius, "Bound on |u(t)|")->capture_default_str();
    falsify->add_option("--segments", cfg.segments, "Input segments")->capture_default_str();
    falsify->add_option("--budget", cfg.budget, "Trajectory evaluations")->capture_default_str();
    falsify->add_option("--jobs", cfg.jobs, "Worker threads")->capture_default_str();
    add_tolerances(falsify, cfg);

    auto* functions = app.add_subcommand("functions", "Run a comparison-function construction");
    functions->add_option("construction", construction,
                          "family-max | extend | factor-kk | factor-product | factor-kl | factor-posdef | "
                          "bound-family | uniformize")
        ->required();
    functions->add_option("--input", cfg.input, "Construction input (JSON)")->required();
    add_tolerances(functions, cfg);

    RunConfig counter_cfg = cfg;
    counter_cfg.horizon = 50.0;
    counter_cfg.budget = 100;
    auto* counter = app.add_subcommand("counterexample", "Reproduce the not-ISS but semiglobally ISS example");
    counter->add_option("--gamma", counter_cfg.gamma, "Candidate ISS gain, expression in r")->capture_default_str();
    counter->add_option("--horizon", counter_cfg.horizon, "Witness horizon")->capture_default_str();
    counter->add_option("--budget", counter_cfg.budget, "Random bound cases")->capture_default_str();
    add_tolerances(counter, counter_cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : iiss::cli::kError;
    }

    try {
        if (*simulate) return iiss::cli::cmd_simulate(cfg);
        if (*check) return iiss::cli::cmd_check(cfg);
        if (*falsify) return iiss::cli::cmd_falsify(cfg);
        if (*functions) return iiss::cli::cmd_functions(cfg, construction);
        if (*counter) return iiss::cli::cmd_counterexample(counter_cfg);
    } catch (const iiss::ParseError& e) {
        std::cerr << "error: parse: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return iiss::cli::kError;
}
