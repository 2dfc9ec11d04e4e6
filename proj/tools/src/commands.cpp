#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>

#include <json.hpp>

#include <iiss/counterexample.hpp>
#include <iiss/errors.hpp>
#include <iiss/estimate_checker.hpp>
#include <iiss/serialization.hpp>
#include <iiss/system_model.hpp>

#include "output.hpp"

namespace iiss::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

ControlSystem load_system(const RunConfig& cfg) {
    if (cfg.system.empty()) {
        throw Error("--system is required");
    }
    ControlSystem sys = parse_system(read_file(cfg.system));
    for (const auto& w : sys.warnings()) {
        std::cerr << "warning: " << w << "\n";
    }
    return sys;
}

EstimateSpec load_spec(const RunConfig& cfg) {
    if (cfg.spec.empty()) {
        throw Error("--spec is required");
    }
    return io::parse_spec(read_file(cfg.spec));
}

InputSignal load_input(const RunConfig& cfg, std::size_t m) {
    if (cfg.input.empty()) {
        return m == 0 ? InputSignal() : InputSignal::zero(m);
    }
    InputSignal u = InputSignal::parse(read_file(cfg.input));
    if (u.dim() != m) {
        throw DomainError("input file has dimension " + std::to_string(u.dim()) + ", the system expects " +
                          std::to_string(m));
    }
    return u;
}

std::vector<double> load_state(const RunConfig& cfg, std::size_t n) {
    if (cfg.xi.empty()) {
        return std::vector<double>(n, 0.0);
    }
    auto xi = parse_vector(cfg.xi);
    if (xi.size() != n) {
        throw DomainError("--xi has " + std::to_string(xi.size()) + " entries, the system has " + std::to_string(n) +
                          " states");
    }
    return xi;
}

SimulationOptions simulation_options(const RunConfig& cfg) {
    SimulationOptions o;
    o.tolerance = {cfg.tol_abs, cfg.tol_rel};
    return o;
}

CheckOptions check_options(const RunConfig& cfg) {
    CheckOptions o;
    o.simulation = simulation_options(cfg);
    o.tolerance = {cfg.cert_abs, cfg.cert_rel};
    return o;
}

int write_report(const RunConfig& cfg, const CheckReport& report, const CheckOptions& options) {
    const io::Header header = make_header(cfg.seed, options.tolerance, options.simulation.tolerance);
    OutputDir out(cfg.out);
    std::optional<std::string> witness_file;
    if (report.violated() && report.witness) {
        witness_file = "witness.json";
        out.write(*witness_file, io::to_json(*report.witness));
    }
    out.write("report.json", io::to_json(report, header, witness_file));
    out.commit();
    std::cout << report.form << " " << to_string(report.verdict) << " margin " << fmt(report.margin)
              << " tolerance " << fmt(report.tolerance) << "\n";
    for (const auto& note : report.notes) {
        std::cout << "  " << note << "\n";
    }
    return report.violated() ? kViolated : kOk;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg) {
    const ControlSystem sys = load_system(cfg);
    const auto xi = load_state(cfg, sys.state_dim());
    const InputSignal u = load_input(cfg, sys.input_dim());
    const SimulationOptions options = simulation_options(cfg);
    const Trajectory traj = simulate(sys, xi, u, cfg.horizon, options);

    const io::Header header = make_header(cfg.seed, {cfg.cert_abs, cfg.cert_rel}, options.tolerance);
    auto comments = header_comments(header);
    comments.push_back("status " + std::string(to_string(traj.status)));

    Json status;
    status["status"] = to_string(traj.status);
    status["end_time"] = traj.end_time();
    status["steps"] = traj.steps.size();
    status["rejected"] = traj.stats.rejected;
    status["evaluations"] = traj.stats.evaluations;
    if (traj.blowup) {
        status["escape_time"] = traj.blowup->escape_time;
        status["escape_norm"] = traj.blowup->norm;
        comments.push_back("escape_time " + fmt(traj.blowup->escape_time));
    }
    if (!traj.message.empty()) {
        status["message"] = traj.message;
    }

    OutputDir out(cfg.out);
    out.write("trajectory.csv", trajectory_csv(traj, u, comments));
    out.write("status.json", io::document(header, {{"result", status.dump()}}));
    out.commit();

    std::cout << to_string(traj.status) << " t=" << fmt(traj.end_time());
    if (traj.blowup) {
        std::cout << " escape_time=" << fmt(traj.blowup->escape_time);
    }
    std::cout << "\n";
    switch (traj.status) {
    case TrajectoryStatus::Completed:
        return kOk;
    case TrajectoryStatus::FiniteEscape:
        return kEscape;
    case TrajectoryStatus::StepFailure:
        std::cerr << "error: " << traj.message << "\n";
        return kError;
    }
    return kError;
}

int cmd_check(const RunConfig& cfg) {
    const ControlSystem sys = load_system(cfg);
    const EstimateSpec spec = load_spec(cfg);
    const CheckOptions options = check_options(cfg);
    CheckReport report;
    if (!cfg.witness.empty()) {
        const Witness w = io::parse_witness(read_file(cfg.witness));
        report = check_estimate(sys, spec, w.xi, w.input, w.horizon, options);
    } else {
        const auto xi = load_state(cfg, sys.state_dim());
        const InputSignal u = load_input(cfg, sys.input_dim());
        report = check_estimate(sys, spec, xi, u, cfg.horizon, options);
    }
    report.seed = cfg.seed;
    return write_report(cfg, report, options);
}

int cmd_falsify(const RunConfig& cfg) {
    const ControlSystem sys = load_system(cfg);
    const EstimateSpec spec = load_spec(cfg);
    FalsifyRegion region{cfg.state_radius, cfg.input_radius, cfg.horizon, cfg.segments};
    FalsifyOptions options;
    options.budget = cfg.budget;
    options.seed = cfg.seed;
    options.jobs = cfg.jobs;
    options.check = check_options(cfg);
    const CheckReport report = falsify(sys, spec, region, options);
    return write_report(cfg, report, options.check);
}

int cmd_counterexample(const RunConfig& cfg) {
    const CheckOptions options = check_options(cfg);
    const ComparisonFunction gamma = ComparisonFunction::expression(cfg.gamma, FunctionClass::K);
    const double horizon = cfg.horizon;
    const auto witness = counterexample::not_iss_witness(gamma, horizon, options);
    const io::Header header = make_header(cfg.seed, options.tolerance, options.simulation.tolerance);
    const auto comments = header_comments(header);

    std::string traj;
    for (const auto& c : comments) {
        traj += "# " + c + "\n";
    }
    traj += "t,x1,x2,x2_closed_form,deviation\n";
    double deviation = 0.0;
    const auto& tr = witness.trajectory;
    for (std::size_t j = 0; j < tr.size(); ++j) {
        const auto x = tr.state(j);
        const double closed = counterexample::closed_form_x2(witness.xi[1], witness.input, tr.times[j]);
        const double dev = std::hypot(x[0] - witness.xi[0], x[1] - witness.xi[1]);
        deviation = std::max(deviation, dev);
        traj += fmt(tr.times[j]) + "," + fmt(x[0]) + "," + fmt(x[1]) + "," + fmt(closed) + "," + fmt(dev) + "\n";
    }

    std::string bounds;
    for (const auto& c : comments) {
        bounds += "# " + c + "\n";
    }
    bounds += "case,xi1,xi2,input_sup,regime,x1_margin,x2_margin\n";
    double worst_x1 = std::numeric_limits<double>::infinity();
    double worst_x2 = std::numeric_limits<double>::infinity();
    const double T = 20.0;
    for (std::size_t i = 0; i < cfg.budget; ++i) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(i), 0x636f756eu};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::vector<double> xi{5.0 * unit(rng), 5.0 * unit(rng)};
        if (std::hypot(xi[0], xi[1]) > 5.0) {
            const double s = 5.0 / std::hypot(xi[0], xi[1]);
            xi[0] *= s;
            xi[1] *= s;
        }
        const double cap = i % 2 == 0 ? 0.5 : 5.0;
        std::vector<std::vector<double>> values(8);
        for (auto& v : values) {
            v = {cap * unit(rng)};
        }
        const InputSignal u = InputSignal::uniform_segments(T, std::move(values));
        const auto x1 = counterexample::check_x1_bound(xi, u, T, options);
        double x2 = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= 200; ++k) {
            x2 = std::min(x2, counterexample::x2_bound_margin(xi[1], u, T * static_cast<double>(k) / 200.0));
        }
        worst_x1 = std::min(worst_x1, x1.margin);
        worst_x2 = std::min(worst_x2, x2);
        bounds += std::to_string(i) + "," + fmt(xi[0]) + "," + fmt(xi[1]) + "," + fmt(u.sup_norm()) + "," +
                  (u.sup_norm() <= 0.5 ? "small" : "large") + "," + fmt(x1.margin) + "," + fmt(x2) + "\n";
    }

    OutputDir out(cfg.out);
    out.write("witness.json", io::to_json(witness.report, header));
    out.write("trajectory.csv", traj);
    out.write("bounds.csv", bounds);
    out.commit();

    std::cout << "not-ISS witness xi=(" << fmt(witness.xi[0]) << ", " << fmt(witness.xi[1]) << ") limsup "
              << fmt(*witness.report.component("limsup")) << " > gain " << fmt(*witness.report.component("gain"))
              << "\n";
    std::cout << "max deviation from the equilibrium " << fmt(deviation) << "\n";
    std::cout << "bound cases " << cfg.budget << " worst x1 margin " << fmt(worst_x1) << " worst x2 margin "
              << fmt(worst_x2) << "\n";
    const bool reproduced = witness.report.violated() && worst_x1 >= -1e-6 && worst_x2 >= -1e-9;
    return reproduced ? kOk : kViolated;
}

}  // namespace iiss::cli
