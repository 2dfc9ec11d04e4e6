#include "iiss/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "checking.hpp"
#include "iiss/errors.hpp"

namespace iiss::counterexample {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

void require_pair(std::span<const double> xi) {
    if (xi.size() != 2) {
        throw DomainError("the counterexample state has two components");
    }
}

CheckReport base_report(const char* form, const CheckOptions& options) {
    CheckReport r;
    r.form = form;
    r.integrator = options.simulation.tolerance;
    r.evaluations = 1;
    return r;
}

}  // namespace

ControlSystem system() {
    return parse_system("n=2 m=1\ndx1 = -x1*(1 - sin(x2))\ndx2 = -x2 + u1\n");
}

double closed_form_x2(double xi2, const InputSignal& u, double t) {
    if (!(t >= 0.0)) {
        throw DomainError("time must be nonnegative");
    }
    double x = xi2 * std::exp(-t);
    const auto& breaks = u.breakpoints();
    for (std::size_t i = 0; i < u.segments() && breaks[i] < t; ++i) {
        const double a = breaks[i];
        const double b = i + 1 < u.segments() ? std::min(breaks[i + 1], t) : t;
        // e^{b-t} - e^{a-t}
        const double weight = -std::exp(b - t) * std::expm1(a - b);
        x += u.segment_value(i)[0] * weight;
    }
    return x;
}

double x2_bound_margin(double xi2, const InputSignal& u, double t) {
    return std::abs(xi2) * std::exp(-t) + u.sup_norm(t) - std::abs(closed_form_x2(xi2, u, t));
}

CheckReport check_x1_bound(std::span<const double> xi, const InputSignal& u, double horizon,
                           const CheckOptions& options) {
    require_pair(xi);
    const Trajectory traj = simulate(system(), xi, u, horizon, options.simulation);
    const bool small = u.sup_norm(horizon) <= 0.5;
    const double scale = std::abs(xi[0]) * std::exp(std::abs(xi[1]));
    CheckReport report = base_report(small ? "X1_SMALL_INPUT" : "X1_LARGE_INPUT", options);
    detail::MarginAccumulator acc;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const double t = traj.times[j];
        acc.add(std::abs(traj.state(j)[0]), small ? scale * std::exp(-0.5 * t) : scale, t);
    }
    acc.finish(report, options.tolerance);
    report.components.emplace_back("lhs", acc.lhs());
    report.components.emplace_back("rhs", acc.rhs());
    report.witness = Witness{std::vector<double>(xi.begin(), xi.end()), u, acc.time(), horizon};
    if (traj.status != TrajectoryStatus::Completed) {
        report.notes.push_back("trajectory " + std::string(to_string(traj.status)));
    }
    return report;
}

NotIssWitness not_iss_witness(const ComparisonFunction& gamma, double horizon, const CheckOptions& options) {
    NotIssWitness w;
    w.xi = {gamma(kHalfPi) + 1.0, kHalfPi};
    w.input = InputSignal::constant({kHalfPi});
    w.trajectory = simulate(system(), w.xi, w.input, horizon, options.simulation);

    const double tail_start = 0.8 * horizon;
    double limsup = 0.0;
    double at = 0.0;
    double deviation = 0.0;
    for (std::size_t j = 0; j < w.trajectory.size(); ++j) {
        const auto x = w.trajectory.state(j);
        deviation = std::max(deviation, std::hypot(x[0] - w.xi[0], x[1] - w.xi[1]));
        if (w.trajectory.times[j] >= tail_start && w.trajectory.state_norm(j) >= limsup) {
            limsup = w.trajectory.state_norm(j);
            at = w.trajectory.times[j];
        }
    }
    const double gain = gamma(w.input.sup_norm());

    CheckReport& r = w.report;
    r = base_report("ASYMPTOTIC_GAIN_LIMSUP", options);
    detail::MarginAccumulator acc;
    acc.add(limsup, gain, at);
    acc.finish(r, options.tolerance);
    r.components.emplace_back("limsup", limsup);
    r.components.emplace_back("gain", gain);
    r.components.emplace_back("max_deviation", deviation);
    r.witness = Witness{w.xi, w.input, at, horizon};
    r.notes.push_back("limsup taken as the max of |x| over [" + detail::format_number(tail_start) + ", " +
                      detail::format_number(horizon) + "]");
    return w;
}

SemiglobalGain semiglobal_gain(double M) {
    if (!(M > 0.0) || !std::isfinite(M)) {
        throw DomainError("semiglobal bound M must be positive");
    }
    return {KLFunction::product(ComparisonFunction::expression("r*exp(r)", FunctionClass::KInfinity),
                                ComparisonFunction::expression("exp(-r/2)", FunctionClass::L)),
            ComparisonFunction::linear(2.0 * M * std::exp(M))};
}

CheckReport check_semiglobal_bound(std::span<const double> xi, const InputSignal& u, double horizon, double M,
                                   const CheckOptions& options) {
    require_pair(xi);
    if (norm(xi) > M) {
        throw DomainError("initial state outside |xi| <= M");
    }
    const SemiglobalGain g = semiglobal_gain(M);
    const Trajectory traj = simulate(system(), xi, u, horizon, options.simulation);
    const double unorm = u.sup_norm(horizon);
    const double r0 = norm(xi);
    CheckReport report = base_report("SEMIGLOBAL_ISS", options);
    detail::MarginAccumulator acc;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const double t = traj.times[j];
        const double rhs = g.beta(r0, t) + g.gamma(unorm) + std::abs(xi[1]) * std::exp(-t) + unorm;
        acc.add(traj.state_norm(j), rhs, t);
    }
    acc.finish(report, options.tolerance);
    report.components.emplace_back("lhs", acc.lhs());
    report.components.emplace_back("rhs", acc.rhs());
    report.witness = Witness{std::vector<double>(xi.begin(), xi.end()), u, acc.time(), horizon};
    return report;
}

}  // namespace iiss::counterexample
