#include "iiss/estimate_checker.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>

#include "checking.hpp"
#include "iiss/errors.hpp"

namespace iiss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct FormName {
    EstimateForm form;
    std::string_view name;
};

constexpr std::array<FormName, 10> kFormNames{{
    {EstimateForm::IISS, "IISS"},
    {EstimateForm::Int2Int, "INT2INT"},
    {EstimateForm::MixedLpLq, "MIXED_LPLQ"},
    {EstimateForm::MixedInt, "MIXED_INT"},
    {EstimateForm::UBEBS, "UBEBS"},
    {EstimateForm::MixedSup, "MIXED_SUP"},
    {EstimateForm::MixedSupNoDecay, "MIXED_SUP_NODECAY"},
    {EstimateForm::Semiglobal, "SEMIGLOBAL"},
    {EstimateForm::ISS, "ISS"},
    {EstimateForm::AsymptoticGain, "ASYMPTOTIC_GAIN"},
}};

Grid slot_grid() {
    const Grid zero{0.0};
    const Grid logs = log_grid(1e-4, 1e2, 48);
    return merge_grids({&zero, &logs});
}

Grid time_grid() {
    const Grid zero{0.0};
    const Grid logs = log_grid(1e-3, 1e2, 32);
    return merge_grids({&zero, &logs});
}

FunctionClass slot_class(const std::string& name) {
    return name == "gamma" ? FunctionClass::K : FunctionClass::KInfinity;
}

CheckReport new_report(const EstimateSpec& spec, const CheckOptions& options) {
    CheckReport r;
    r.form = std::string(to_string(spec.form));
    r.integrator = options.simulation.tolerance;
    r.evaluations = 1;
    return r;
}

CheckReport new_report(std::string form, const CheckOptions& options) {
    CheckReport r;
    r.form = std::move(form);
    r.integrator = options.simulation.tolerance;
    r.evaluations = 1;
    return r;
}

void note_status(const Trajectory& traj, CheckReport& report) {
    if (traj.status != TrajectoryStatus::Completed) {
        report.notes.push_back("trajectory " + std::string(to_string(traj.status)) + " at t=" +
                               detail::format_number(traj.end_time()));
    }
}

void attach_witness(CheckReport& report, std::span<const double> xi, const InputSignal& u, double time,
                    double horizon) {
    report.witness = Witness{std::vector<double>(xi.begin(), xi.end()), u, time, horizon};
}

void add_extremes(CheckReport& report, const detail::MarginAccumulator& acc) {
    report.components.emplace_back("lhs", acc.lhs());
    report.components.emplace_back("rhs", acc.rhs());
}

double xnorm(std::span<const double> x) { return norm(x); }

}  // namespace

// ---------------------------------------------------------------------------
// Forms and specs
// ---------------------------------------------------------------------------

std::string_view to_string(EstimateForm f) noexcept {
    for (const auto& entry : kFormNames) {
        if (entry.form == f) {
            return entry.name;
        }
    }
    return "IISS";
}

EstimateForm estimate_form_from_string(std::string_view s) {
    for (const auto& entry : kFormNames) {
        if (entry.name == s) {
            return entry.form;
        }
    }
    throw SpecError("unknown estimate form '" + std::string(s) + "'");
}

bool is_integral_form(EstimateForm f) noexcept {
    return f == EstimateForm::Int2Int || f == EstimateForm::MixedLpLq || f == EstimateForm::MixedInt;
}

std::string_view to_string(Verdict v) noexcept {
    return v == Verdict::Violated ? "violated" : "holds-on-samples";
}

std::vector<std::string> EstimateSpec::required_slots(EstimateForm form) {
    switch (form) {
    case EstimateForm::IISS:
    case EstimateForm::Semiglobal:
        return {"alpha", "beta", "sigma"};
    case EstimateForm::Int2Int:
    case EstimateForm::MixedInt:
        return {"alpha", "chi", "sigma"};
    case EstimateForm::MixedLpLq:
        return {"sigma"};
    case EstimateForm::UBEBS:
        return {"alpha", "gamma", "sigma"};
    case EstimateForm::MixedSup:
        return {"alpha", "beta", "sigma", "gamma"};
    case EstimateForm::MixedSupNoDecay:
        return {"alpha", "beta0", "sigma", "gamma"};
    case EstimateForm::ISS:
        return {"beta", "gamma"};
    case EstimateForm::AsymptoticGain:
        return {"gamma"};
    }
    return {};
}

const ComparisonFunction& EstimateSpec::function(const std::string& name) const {
    const auto it = functions.find(name);
    if (it == functions.end()) {
        throw SpecError(std::string(to_string(form)) + " estimate needs slot '" + name + "'");
    }
    return it->second;
}

void EstimateSpec::validate() const {
    const Grid grid = slot_grid();
    for (const auto& slot : required_slots(form)) {
        if (slot == "beta") {
            if (!beta) {
                throw SpecError(std::string(to_string(form)) + " estimate needs slot 'beta'");
            }
            const auto cert = verify_class(*beta, grid, time_grid());
            if (!cert.pass) {
                throw ClassError("slot 'beta' is not of class KL: " + cert.description);
            }
            continue;
        }
        const auto& f = function(slot);
        const FunctionClass cls = slot_class(slot);
        const auto cert = verify_class(f, cls, grid);
        if (!cert.pass) {
            throw ClassError("slot '" + slot + "' is not of class " + std::string(to_string(cls)) + ": " +
                             cert.description);
        }
    }
    if (form == EstimateForm::MixedLpLq && !(p >= 1.0 && q >= 1.0 && std::isfinite(p) && std::isfinite(q))) {
        throw SpecError("MIXED_LPLQ exponents must satisfy p, q >= 1");
    }
    if (form == EstimateForm::UBEBS && !(c >= 0.0 && std::isfinite(c))) {
        throw SpecError("UBEBS constant c must be finite and nonnegative");
    }
    if (form == EstimateForm::Semiglobal && !(M > 0.0)) {
        throw SpecError("SEMIGLOBAL bound M must be positive");
    }
}

std::optional<double> CheckReport::component(std::string_view name) const {
    for (const auto& [key, value] : components) {
        if (key == name) {
            return value;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trajectory checks
// ---------------------------------------------------------------------------

namespace detail {

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t index, std::uint32_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), tag};
    return std::mt19937_64(seq);
}

std::vector<double> random_ball_point(std::mt19937_64& rng, std::size_t dim, double radius) {
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit;
    std::vector<double> v(dim);
    for (double& c : v) {
        c = gauss(rng);
    }
    const double len = norm(v);
    const double scale = len > 0.0 ? radius * std::pow(unit(rng), 1.0 / static_cast<double>(dim)) / len : 0.0;
    for (double& c : v) {
        c *= scale;
    }
    return v;
}

std::string format_number(double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

namespace {

CheckReport pointwise(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                      const EstimateSpec& spec, const CheckOptions& options) {
    CheckReport report = new_report(spec, options);
    MarginAccumulator acc;
    const double r0 = xnorm(xi);
    const double horizon = traj.end_time();

    auto fn = [&](const char* name) -> const ComparisonFunction& { return spec.function(name); };

    switch (spec.form) {
    case EstimateForm::IISS:
    case EstimateForm::Semiglobal: {
        if (spec.form == EstimateForm::Semiglobal) {
            const double unorm = u.sup_norm(horizon);
            if (r0 > spec.M || unorm > spec.M) {
                throw DomainError("SEMIGLOBAL estimate applies to |xi| <= M and |u| <= M (M=" +
                                  format_number(spec.M) + ")");
            }
        }
        const auto& alpha = fn("alpha");
        const auto& sigma = fn("sigma");
        for (std::size_t j = 0; j < traj.size(); ++j) {
            const double t = traj.times[j];
            acc.add(alpha(traj.state_norm(j)), (*spec.beta)(r0, t) + u.integral(sigma, t), t);
        }
        break;
    }
    case EstimateForm::UBEBS: {
        const auto& alpha = fn("alpha");
        const auto& sigma = fn("sigma");
        const double base = fn("gamma")(r0) + spec.c;
        for (std::size_t j = 0; j < traj.size(); ++j) {
            const double t = traj.times[j];
            acc.add(alpha(traj.state_norm(j)), base + u.integral(sigma, t), t);
        }
        break;
    }
    case EstimateForm::MixedSup:
    case EstimateForm::MixedSupNoDecay: {
        const auto& alpha = fn("alpha");
        const auto& sigma = fn("sigma");
        const auto& gamma = fn("gamma");
        const bool decays = spec.form == EstimateForm::MixedSup;
        const double flat = decays ? 0.0 : fn("beta0")(r0);
        for (std::size_t j = 0; j < traj.size(); ++j) {
            const double t = traj.times[j];
            const double transient = decays ? (*spec.beta)(r0, t) : flat;
            acc.add(alpha(traj.state_norm(j)), transient + u.integral(sigma, t) + gamma(u.sup_norm(t)), t);
        }
        break;
    }
    case EstimateForm::ISS: {
        const double gain = fn("gamma")(u.sup_norm(horizon));
        for (std::size_t j = 0; j < traj.size(); ++j) {
            const double t = traj.times[j];
            acc.add(traj.state_norm(j), (*spec.beta)(r0, t) + gain, t);
        }
        break;
    }
    case EstimateForm::AsymptoticGain: {
        const double tail_start = 0.8 * horizon;
        double tail_min = kInf;
        double at = horizon;
        for (std::size_t j = 0; j < traj.size(); ++j) {
            const double t = traj.times[j];
            const double v = traj.state_norm(j);
            if (t >= tail_start && !(v >= tail_min)) {
                tail_min = v;
                at = t;
            }
        }
        acc.add(tail_min, fn("gamma")(u.sup_norm(horizon)), at);
        report.notes.push_back("asymptotic gain approximated by the minimum of |x| over [" +
                               format_number(tail_start) + ", " + format_number(horizon) +
                               "]; the verdict depends on the horizon");
        break;
    }
    default:
        throw SpecError(std::string(to_string(spec.form)) + " is not a pointwise estimate");
    }

    acc.finish(report, options.tolerance);
    add_extremes(report, acc);
    attach_witness(report, xi, u, acc.time(), horizon);
    note_status(traj, report);
    return report;
}

CheckReport integral(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                     const EstimateSpec& spec, const CheckOptions& options) {
    CheckReport report = new_report(spec, options);
    MarginAccumulator acc;
    const double r0 = xnorm(xi);
    const auto& sigma = spec.function("sigma");

    switch (spec.form) {
    case EstimateForm::Int2Int:
    case EstimateForm::MixedInt: {
        const auto& alpha = spec.function("alpha");
        const auto& chi = spec.function("chi");
        const auto lhs = traj.running_integral(
            [&](std::span<const double> x, std::span<const double>) { return alpha(xnorm(x)); });
        const double chi0 = chi(r0);
        for (std::size_t j = 0; j < traj.size(); ++j) {
            const double t = traj.times[j];
            const double energy = u.integral(sigma, t);
            const double rhs = spec.form == EstimateForm::Int2Int ? chi0 + energy : chi(r0 + energy);
            acc.add(lhs[j], rhs, t);
        }
        break;
    }
    case EstimateForm::MixedLpLq: {
        const double p = spec.p;
        const double q = spec.q;
        const auto lhs = traj.running_integral(
            [&](std::span<const double> x, std::span<const double>) { return std::pow(xnorm(x), q); });
        const auto weighted = [&](double s) { return std::pow(sigma(s), p); };
        const double base = std::pow(r0, p);
        for (std::size_t j = 0; j < traj.size(); ++j) {
            const double t = traj.times[j];
            acc.add(std::pow(lhs[j], 1.0 / q), std::pow(base + u.integral_of(weighted, t), 1.0 / p), t);
        }
        break;
    }
    default:
        throw SpecError(std::string(to_string(spec.form)) + " is not an integral estimate");
    }

    acc.finish(report, options.tolerance);
    add_extremes(report, acc);
    attach_witness(report, xi, u, acc.time(), traj.end_time());
    note_status(traj, report);
    return report;
}

}  // namespace

CheckReport check_trajectory_unvalidated(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                                         const EstimateSpec& spec, const CheckOptions& options) {
    if (traj.size() == 0) {
        throw DomainError("empty trajectory");
    }
    return is_integral_form(spec.form) ? integral(traj, u, xi, spec, options)
                                       : pointwise(traj, u, xi, spec, options);
}

CheckReport check_estimate_unvalidated(const ControlSystem& sys, const EstimateSpec& spec,
                                       std::span<const double> xi, const InputSignal& u, double horizon,
                                       const CheckOptions& options) {
    const Trajectory traj = simulate(sys, xi, u, horizon, options.simulation);
    CheckReport report = check_trajectory_unvalidated(traj, u, xi, spec, options);
    if (report.witness) {
        report.witness->horizon = horizon;
    }
    return report;
}

}  // namespace detail

CheckReport check_pointwise(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                            const EstimateSpec& spec, const CheckOptions& options) {
    if (is_integral_form(spec.form)) {
        throw SpecError(std::string(to_string(spec.form)) + " is not a pointwise estimate");
    }
    spec.validate();
    return detail::check_trajectory_unvalidated(traj, u, xi, spec, options);
}

CheckReport check_integral(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                           const EstimateSpec& spec, const CheckOptions& options) {
    if (!is_integral_form(spec.form)) {
        throw SpecError(std::string(to_string(spec.form)) + " is not an integral estimate");
    }
    spec.validate();
    return detail::check_trajectory_unvalidated(traj, u, xi, spec, options);
}

CheckReport check_trajectory(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                             const EstimateSpec& spec, const CheckOptions& options) {
    spec.validate();
    return detail::check_trajectory_unvalidated(traj, u, xi, spec, options);
}

CheckReport check_estimate(const ControlSystem& sys, const EstimateSpec& spec, std::span<const double> xi,
                           const InputSignal& u, double horizon, const CheckOptions& options) {
    spec.validate();
    return detail::check_estimate_unvalidated(sys, spec, xi, u, horizon, options);
}

CheckReport replay_witness(const ControlSystem& sys, const EstimateSpec& spec, const Witness& witness,
                           const CheckOptions& options, double factor) {
    if (!(factor > 0.0)) {
        throw DomainError("replay tolerance factor must be positive");
    }
    CheckOptions tight = options;
    tight.simulation.tolerance.absolute *= factor;
    tight.simulation.tolerance.relative *= factor;
    return check_estimate(sys, spec, witness.xi, witness.input, witness.horizon, tight);
}

// ---------------------------------------------------------------------------
// Comparison problem
// ---------------------------------------------------------------------------

Trajectory comparison_bound(const InputSignal& u, const ComparisonFunction& sigma,
                            const ComparisonFunction& rho_star, double w0, double horizon,
                            const SimulationOptions& options) {
    if (!(w0 >= 0.0) || !std::isfinite(w0)) {
        throw DomainError("comparison initial value must be finite and nonnegative");
    }
    const auto cert = verify_class(rho_star, FunctionClass::PositiveDefinite, slot_grid());
    if (!cert.pass) {
        throw ClassError("comparison rate is not positive definite: " + cert.description);
    }
    ControlSystem field(1, u.dim(),
                        [sigma, rho_star](std::span<const double> w, std::span<const double> v, std::span<double> dw) {
                            dw[0] = sigma(norm(v)) - rho_star(std::max(w[0], 0.0));
                        });
    const std::array<double, 1> start{w0};
    Trajectory traj = simulate(field, start, u, horizon, options);
    for (double& w : traj.states) {
        w = std::max(w, 0.0);
    }
    return traj;
}

double default_comparison_offset(double w0) noexcept { return 1e-8 * (1.0 + w0); }

CheckReport check_domination(const std::vector<double>& times, const std::vector<double>& values,
                             const Trajectory& w, double epsilon, const CheckOptions& options) {
    if (times.size() != values.size()) {
        throw DomainError("domination check needs one value per sample time");
    }
    if (w.size() == 0 || w.n != 1) {
        throw DomainError("comparison trajectory must be scalar and nonempty");
    }
    CheckReport report = new_report("DOMINATION", options);
    detail::MarginAccumulator acc;
    for (std::size_t j = 0; j < times.size(); ++j) {
        const double t = times[j];
        if (!(t >= 0.0) || t > w.end_time()) {
            throw DomainError("sample time " + detail::format_number(t) + " outside the comparison trajectory");
        }
        const double bound = std::max(w.state_at(t)[0], 0.0);
        acc.add(values[j], bound + epsilon, t);
    }
    acc.finish(report, options.tolerance);
    add_extremes(report, acc);
    report.components.emplace_back("epsilon", epsilon);
    return report;
}

// ---------------------------------------------------------------------------
// Lyapunov dissipation
// ---------------------------------------------------------------------------

std::vector<double> numeric_gradient(const Expression& V, std::span<const double> x) {
    const double h = 1e-6 * (1.0 + norm(x));
    std::vector<double> probe(x.begin(), x.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double up = V.evaluate(probe);
        probe[i] = x[i] - h;
        const double down = V.evaluate(probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

namespace {

template <class Bound>
CheckReport dissipation(const char* form, const ControlSystem& sys, const Expression& V,
                        const std::vector<StateInputSample>& samples, const CheckOptions& options, Bound bound) {
    CheckReport report = new_report(form, options);
    detail::MarginAccumulator acc;
    std::vector<double> dx(sys.state_dim());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        if (s.x.size() != sys.state_dim() || s.u.size() != sys.input_dim()) {
            throw DomainError("dissipation sample has the wrong dimension");
        }
        sys.evaluate(s.x, s.u, dx);
        const auto grad = numeric_gradient(V, s.x);
        double lhs = 0.0;
        for (std::size_t i = 0; i < dx.size(); ++i) {
            lhs += grad[i] * dx[i];
        }
        acc.add(lhs, bound(norm(s.x), norm(s.u)), static_cast<double>(k));
    }
    acc.finish(report, options.tolerance);
    add_extremes(report, acc);
    report.components.emplace_back("worst_sample", acc.time());
    report.evaluations = samples.size();
    return report;
}

}  // namespace

CheckReport check_lyapunov_dissipation(const ControlSystem& sys, const Expression& V,
                                       const ComparisonFunction& rho, const ComparisonFunction& sigma,
                                       const std::vector<StateInputSample>& samples, const CheckOptions& options) {
    return dissipation("DISSIPATION", sys, V, samples, options,
                       [&](double rx, double ru) { return -rho(rx) + sigma(ru); });
}

CheckReport check_lyapunov_product(const ControlSystem& sys, const Expression& V, const ComparisonFunction& theta,
                                   const ComparisonFunction& delta, const std::vector<StateInputSample>& samples,
                                   const CheckOptions& options) {
    return dissipation("DISSIPATION_PRODUCT", sys, V, samples, options,
                       [&](double rx, double ru) { return theta(rx) * delta(ru); });
}

// ---------------------------------------------------------------------------
// Forward completeness
// ---------------------------------------------------------------------------

CheckReport check_forward_complete_bound(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                                         const GrowthBound& bound, const CheckOptions& options) {
    if (traj.size() == 0) {
        throw DomainError("empty trajectory");
    }
    CheckReport report = new_report("FORWARD_COMPLETE", options);
    detail::MarginAccumulator acc;
    const double base = bound.state_gain(xnorm(xi)) + bound.offset;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const double t = traj.times[j];
        const double rhs = bound.time_gain(t) + base + bound.energy_gain(u.integral(bound.input_weight, t));
        acc.add(traj.state_norm(j), rhs, t);
    }
    acc.finish(report, options.tolerance);
    add_extremes(report, acc);
    attach_witness(report, xi, u, acc.time(), traj.end_time());
    note_status(traj, report);
    return report;
}

namespace {

/// Input energy over the active window; the trailing zero segment is excluded.
double window_energy(const std::vector<std::vector<double>>& values, double segment_length,
                     const std::function<double(double)>& delta) {
    double total = 0.0;
    for (const auto& v : values) {
        total += delta(norm(v)) * segment_length;
    }
    return total;
}

InputSignal windowed_input(const std::vector<std::vector<double>>& values, double window) {
    const std::size_t k = values.size();
    std::vector<double> breaks(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
        breaks[i] = window * static_cast<double>(i) / static_cast<double>(k);
    }
    auto all = values;
    all.emplace_back(values.front().size(), 0.0);
    return InputSignal(std::move(breaks), std::move(all));
}

}  // namespace

CheckReport reach_bound_m(const ControlSystem& sys, double r, const GrowthBound& bound,
                          const ComparisonFunction& alpha, const ComparisonFunction& chi,
                          const ComparisonFunction& sigma, const ReachOptions& options) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw DomainError("reach radius must be positive");
    }
    const double alpha_r = alpha(r);
    if (alpha_r == 0.0) {
        throw DomainError("alpha(r) = 0: the reach bound divides by zero");
    }
    if (options.budget == 0 || options.segments == 0 || !(options.input_horizon > 0.0) ||
        !(options.horizon >= options.input_horizon)) {
        throw DomainError("reach search needs a positive budget, segments and horizons");
    }
    const auto& gamma = bound.input_weight;
    const std::function<double(double)> delta = [&](double s) { return std::max(gamma(s), sigma(s)); };
    const double limit = bound.time_gain(chi(2.0 * r) / alpha_r) + bound.state_gain(r) + bound.energy_gain(r) +
                         bound.offset;

    const std::size_t n = sys.state_dim();
    const std::size_t m = sys.input_dim();
    const double seg_len = options.input_horizon / static_cast<double>(options.segments);

    CheckReport report = new_report("REACH_BOUND", options.check);
    report.seed = options.seed;
    detail::MarginAccumulator acc;
    double best = -kInf;
    std::vector<double> best_xi;
    InputSignal best_u;
    double best_t = 0.0;

    for (std::size_t i = 0; i < options.budget; ++i) {
        std::vector<double> xi(n, 0.0);
        std::vector<std::vector<double>> values(options.segments, std::vector<double>(m, 0.0));
        if (i == 0) {
            if (n > 0) {
                xi[0] = r;
            }
        } else {
            auto rng = detail::seeded_rng(options.seed, i, 0x72656163u);
            xi = detail::random_ball_point(rng, n, r);
            if (i % 2 == 1 && n > 0) {
                const double len = norm(xi);
                for (double& c : xi) {
                    c = len > 0.0 ? c * r / len : c;
                }
            }
            if (m > 0) {
                for (auto& v : values) {
                    v = detail::random_ball_point(rng, m, options.input_radius);
                }
                if (window_energy(values, seg_len, delta) > r) {
                    double lo = 0.0;
                    double hi = 1.0;
                    auto scaled = [&](double lambda) {
                        auto out = values;
                        for (auto& v : out) {
                            for (double& c : v) {
                                c *= lambda;
                            }
                        }
                        return out;
                    };
                    for (int iter = 0; iter < 60; ++iter) {
                        const double mid = 0.5 * (lo + hi);
                        (window_energy(scaled(mid), seg_len, delta) <= r ? lo : hi) = mid;
                    }
                    values = scaled(lo);
                }
            }
        }
        const InputSignal u = m > 0 ? windowed_input(values, options.input_horizon) : InputSignal();
        const Trajectory traj = simulate(sys, xi, u, options.horizon, options.check.simulation);
        for (std::size_t j = 0; j < traj.size(); ++j) {
            const double v = traj.state_norm(j);
            if (!(v <= best)) {
                best = v;
                best_xi = xi;
                best_u = u;
                best_t = traj.times[j];
            }
        }
        if (traj.status != TrajectoryStatus::Completed) {
            best = kInf;
            best_xi = xi;
            best_u = u;
            best_t = traj.end_time();
            report.notes.push_back("sample " + std::to_string(i) + " " + std::string(to_string(traj.status)));
            break;
        }
    }
    acc.add(best, limit, best_t);
    acc.finish(report, options.check.tolerance);
    report.evaluations = options.budget;
    report.components.emplace_back("reach", best);
    report.components.emplace_back("bound", limit);
    attach_witness(report, best_xi, best_u, best_t, options.horizon);
    return report;
}

// ---------------------------------------------------------------------------
// Auxiliary closed loop
// ---------------------------------------------------------------------------

CheckReport auxiliary_gain_check(const ControlSystem& sys, const ComparisonFunction& phi,
                                 const ComparisonFunction& beta0, const ComparisonFunction& alpha,
                                 const ComparisonFunction& gamma, const std::vector<AuxiliaryCase>& cases,
                                 double horizon, const CheckOptions& options) {
    {
        const Grid zero{0.0};
        const Grid logs = log_grid(1e-6, 1e3, 128);
        CertificateBuilder cert("gamma(phi(s)) <= alpha(s)/2", options.tolerance);
        for (double s : merge_grids({&zero, &logs})) {
            cert.add(gamma(phi(s)), 0.5 * alpha(s), {s});
        }
        const auto result = cert.finish();
        if (!result.pass) {
            throw SpecError("gain condition gamma(phi(s)) <= alpha(s)/2 fails at s=" +
                            detail::format_number(result.worst_point.empty() ? 0.0 : result.worst_point[0]));
        }
    }

    CheckReport report = new_report("AUXILIARY", options);
    detail::MarginAccumulator overall;
    detail::MarginAccumulator z_bound;
    detail::MarginAccumulator doubled;
    std::size_t worst_case = 0;
    double worst_margin = kInf;

    for (std::size_t k = 0; k < cases.size(); ++k) {
        const auto& c = cases[k];
        const ClosedLoop loop = close_loop(sys, phi, c.disturbance);
        const Trajectory traj = simulate(loop.system, c.xi, loop.disturbance, horizon, options.simulation);
        const auto injected = traj.running_integral([&](std::span<const double> x, std::span<const double> d) {
            return gamma(norm(d) * phi(norm(x)));
        });
        const double b = beta0(xnorm(c.xi));
        detail::MarginAccumulator local;
        for (std::size_t j = 0; j < traj.size(); ++j) {
            const double t = traj.times[j];
            const double a = alpha(traj.state_norm(j));
            const double z = 0.5 * a - injected[j];
            const double rhs2 = 2.0 * b + 2.0 * injected[j];
            z_bound.add(z, b, t);
            doubled.add(a, rhs2, t);
            overall.add(z, b, t);
            overall.add(a, rhs2, t);
            local.add(z, b, t);
            local.add(a, rhs2, t);
        }
        if (traj.status != TrajectoryStatus::Completed) {
            note_status(traj, report);
        }
        if (local.margin() < worst_margin) {
            worst_margin = local.margin();
            worst_case = k;
            attach_witness(report, c.xi, c.disturbance, local.time(), horizon);
        }
    }
    overall.finish(report, options.tolerance);
    report.evaluations = cases.size();
    report.components.emplace_back("z_margin", z_bound.margin());
    report.components.emplace_back("doubled_margin", doubled.margin());
    report.components.emplace_back("worst_case", static_cast<double>(worst_case));
    return report;
}

}  // namespace iiss
