#pragma once

#include <cstdint>
#include <string>

namespace iiss::cli {

enum ExitCode : int { kOk = 0, kError = 1, kEscape = 2, kViolated = 3 };

struct RunConfig {
    std::string system;
    std::string spec;
    std::string input;
    std::string xi;
    std::string out = "out";
    std::string gamma = "r";
    std::string witness;
    double horizon = 10.0;
    double state_radius = 1.0;
    double input_radius = 1.0;
    std::size_t segments = 8;
    std::size_t budget = 200;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    double tol_abs = 1e-8;
    double tol_rel = 1e-6;
    double cert_abs = 1e-9;
    double cert_rel = 1e-6;
};

int cmd_simulate(const RunConfig& cfg);
int cmd_check(const RunConfig& cfg);
int cmd_falsify(const RunConfig& cfg);
int cmd_functions(const RunConfig& cfg, const std::string& construction);
int cmd_counterexample(const RunConfig& cfg);

}  // namespace iiss::cli
