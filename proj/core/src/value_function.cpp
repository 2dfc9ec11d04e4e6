#include <algorithm>
#include <cmath>
#include <limits>

#include "checking.hpp"
#include "iiss/errors.hpp"
#include "iiss/estimate_checker.hpp"

namespace iiss {

namespace {

constexpr std::uint32_t kValueTag = 0x76616c75u;

struct Peak {
    double value = -std::numeric_limits<double>::infinity();
    double time = 0.0;
};

/// max_j alpha(|x(t_j)|) - cost0 - int_0^{t_j} sigma1(|u|)
Peak functional_peak(const Trajectory& traj, const InputSignal& u, const ComparisonFunction& alpha,
                     const ComparisonFunction& sigma1, double cost0) {
    Peak p;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const double t = traj.times[j];
        const double v = alpha(traj.state_norm(j)) - cost0 - (u.dim() > 0 ? u.integral(sigma1, t) : 0.0);
        if (v > p.value) {
            p.value = v;
            p.time = t;
        }
    }
    return p;
}

std::size_t family_size(const ControlSystem& sys, std::size_t budget) {
    return sys.input_dim() == 0 ? std::min<std::size_t>(budget, 1) : budget;
}

}  // namespace

InputSignal value_search_input(std::size_t index, std::size_t input_dim, std::uint64_t seed,
                               const ValueSearchOptions& options) {
    if (input_dim == 0) {
        return InputSignal();
    }
    if (index == 0) {
        return InputSignal::zero(input_dim);
    }
    auto rng = detail::seeded_rng(seed, index, kValueTag);
    std::vector<std::vector<double>> values(std::max<std::size_t>(options.segments, 1));
    for (auto& v : values) {
        v = detail::random_ball_point(rng, input_dim, options.input_radius);
    }
    return InputSignal::uniform_segments(options.horizon, std::move(values));
}

ValueEstimate estimate_value_function(const ControlSystem& sys, const ComparisonFunction& alpha,
                                      const ComparisonFunction& sigma1, std::span<const double> xi,
                                      std::size_t budget, std::uint64_t seed, const ValueSearchOptions& options) {
    if (budget == 0) {
        throw DomainError("value search budget must be at least 1");
    }
    ValueEstimate est;
    est.xi.assign(xi.begin(), xi.end());
    est.value = -std::numeric_limits<double>::infinity();
    const std::size_t members = family_size(sys, budget);
    for (std::size_t i = 0; i < members; ++i) {
        InputSignal v = value_search_input(i, sys.input_dim(), seed, options);
        const Trajectory traj = simulate(sys, xi, v, options.horizon, options.check.simulation);
        const Peak p = functional_peak(traj, v, alpha, sigma1, 0.0);
        if (p.value > est.value) {
            est.value = p.value;
            est.time = p.time;
            est.input = std::move(v);
        }
        ++est.evaluated;
    }
    return est;
}

CheckReport check_value_dissipation(const ControlSystem& sys, const ComparisonFunction& alpha,
                                    const ComparisonFunction& sigma1, std::span<const double> xi, double t,
                                    const InputSignal& u, std::size_t budget, std::uint64_t seed,
                                    const ValueSearchOptions& options) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw DomainError("dissipation time must be finite and nonnegative");
    }
    std::vector<double> y(xi.begin(), xi.end());
    if (t > 0.0) {
        const Trajectory head = simulate(sys, xi, u, t, options.check.simulation);
        if (head.status != TrajectoryStatus::Completed) {
            throw DomainError("trajectory does not reach the dissipation time: " + head.message);
        }
        const auto last = head.state(head.size() - 1);
        y.assign(last.begin(), last.end());
    }
    const ValueEstimate at_y = estimate_value_function(sys, alpha, sigma1, y, budget, seed, options);
    const ValueEstimate at_xi = estimate_value_function(sys, alpha, sigma1, xi, budget, seed, options);

    double upper = at_xi.value;
    const double cost = u.dim() > 0 ? u.integral(sigma1, t) : 0.0;
    std::size_t evaluations = at_y.evaluated + at_xi.evaluated;
    if (t > 0.0) {
        const std::size_t members = family_size(sys, budget);
        for (std::size_t i = 0; i < members; ++i) {
            const InputSignal v = value_search_input(i, sys.input_dim(), seed, options);
            const InputSignal joined = sys.input_dim() > 0 ? concat(u, v, t) : InputSignal();
            const Trajectory traj = simulate(sys, xi, joined, t + options.horizon, options.check.simulation);
            upper = std::max(upper, functional_peak(traj, joined, alpha, sigma1, 0.0).value);
            ++evaluations;
        }
    }

    CheckReport report;
    report.form = "VALUE_DISSIPATION";
    report.seed = seed;
    report.integrator = options.check.simulation.tolerance;
    report.evaluations = evaluations;
    detail::MarginAccumulator acc;
    acc.add(at_y.value - upper, cost, t);
    acc.finish(report, options.check.tolerance);
    report.components.emplace_back("value_at_state", at_y.value);
    report.components.emplace_back("value_closure_at_start", upper);
    report.components.emplace_back("integral", cost);
    report.witness = Witness{std::vector<double>(xi.begin(), xi.end()), u, t, t + options.horizon};
    return report;
}

}  // namespace iiss
