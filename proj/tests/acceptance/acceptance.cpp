#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <iiss/constructions.hpp>
#include <iiss/counterexample.hpp>
#include <iiss/estimate_checker.hpp>
#include <iiss/ode.hpp>
#include <iiss/serialization.hpp>

#include "oracles.hpp"

using namespace iiss;
namespace ce = iiss::counterexample;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;
constexpr double kInf = std::numeric_limits<double>::infinity();
const ComparisonFunction kId = ComparisonFunction::identity();

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int number;
    const char* name;
    double time_limit;
    std::function<Outcome()> run;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

ControlSystem linear() { return parse_system("n=1 m=1\ndx1 = -x1 + u1"); }

EstimateSpec claim_spec() {
    EstimateSpec s;
    s.form = EstimateForm::ISS;
    s.functions = {{"gamma", kId}};
    s.beta = KLFunction::exponential();
    return s;
}

std::vector<double> ball_point(std::mt19937_64& g, double radius) {
    for (;;) {
        std::vector<double> v{oracle::uniform(g, -radius, radius), oracle::uniform(g, -radius, radius)};
        if (std::hypot(v[0], v[1]) <= radius) {
            return v;
        }
    }
}

/// Random scalar input whose sup norm is exactly `sup`.
InputSignal input_with_sup(std::mt19937_64& g, double T, std::size_t k, double sup) {
    std::vector<std::vector<double>> values(k);
    for (auto& v : values) {
        v = {oracle::uniform(g, -sup, sup)};
    }
    const auto pick = static_cast<std::size_t>(oracle::uniform(g, 0, static_cast<double>(k)));
    values[std::min(pick, k - 1)][0] = oracle::uniform(g, 0, 1) < 0.5 ? -sup : sup;
    return InputSignal::uniform_segments(T, std::move(values));
}

Outcome claim1_equilibrium() {
    const auto w = ce::not_iss_witness(kId, 50.0);
    double deviation = 0.0;
    for (std::size_t j = 0; j < w.trajectory.size(); ++j) {
        const auto x = w.trajectory.state(j);
        deviation = std::max(deviation, std::hypot(x[0] - w.xi[0], x[1] - w.xi[1]));
    }
    const auto report = check_estimate(ce::system(), claim_spec(), w.xi, w.input, 50.0);
    Outcome o;
    o.pass = deviation <= 1e-6 && report.violated() && report.margin <= -(1.0 - 1e-3);
    o.detail = "max deviation " + fmt(deviation) + ", ISS margin " + fmt(report.margin);
    return o;
}

Outcome claim2_bounds() {
    auto g = oracle::rng(20);
    double small = kInf;
    double large = kInf;
    double x2 = kInf;
    for (int i = 0; i < 1000; ++i) {
        const bool is_small = i < 500;
        const auto xi = ball_point(g, 5.0);
        const double sup = is_small ? oracle::uniform(g, 0.0, 0.5) : oracle::uniform(g, 0.5, 5.0);
        const auto u = input_with_sup(g, 20.0, 8, sup);
        const auto r = ce::check_x1_bound(xi, u, 20.0);
        (is_small ? small : large) = std::min(is_small ? small : large, r.margin);
        const auto traj = simulate(ce::system(), xi, u, 20.0);
        for (double t : traj.times) {
            x2 = std::min(x2, ce::x2_bound_margin(xi[1], u, t));
        }
    }
    Outcome o;
    o.pass = small >= -1e-6 && large >= -1e-6 && x2 >= -1e-9;
    o.detail = "x1 small-input margin " + fmt(small) + ", large-input margin " + fmt(large) + ", x2 margin " +
               fmt(x2);
    return o;
}

Outcome construction_chain() {
    std::vector<ComparisonFunction> members;
    for (int M = 1; M <= 4; ++M) {
        members.push_back(ComparisonFunction::power(1.0, M));
    }
    const FunctionFamily family(members);
    const Grid grid = linear_grid(0.0, 3.0, 64);
    const auto res = bound_family(family, grid);
    bool links = res.links.size() == 3;
    for (const auto& c : res.links) {
        links = links && c.pass && c.worst_slack >= -1e-9;
    }
    // Independent re-check of the end-to-end bound.
    double slack = kInf;
    for (int M = 1; M <= 4; ++M) {
        for (double r : grid) {
            slack = std::min(slack, res.sigma(M) * res.sigma(r) - std::pow(r, M));
        }
    }
    Outcome o;
    o.pass = links && res.certificate.pass && res.certificate.worst_slack >= -1e-9 && slack >= -1e-9;
    o.detail = "certificate slack " + fmt(res.certificate.worst_slack) + ", recomputed slack " + fmt(slack) +
               ", links " + (links ? "certified" : "failed");
    return o;
}

Outcome uniformization() {
    std::vector<KLFunction> decay;
    std::vector<ComparisonFunction> ids;
    for (int M = 1; M <= 8; ++M) {
        decay.push_back(KLFunction::composed(kId, ComparisonFunction::linear(M)));
        ids.push_back(kId);
    }
    UniformFamilies fam{KLFamily(decay), FunctionFamily(ids), FunctionFamily(ids), [](double r) { return r; },
                        [](double r) { return r; }};
    UniformizeOptions opts;
    opts.samples = 200;
    opts.R_max = 3.0;
    opts.S_max = 3.0;
    opts.phi_max = 3.0;
    opts.seed = 4;
    const auto res = uniformize(fam, opts);
    double slack = kInf;
    const auto samples = uniform_samples(opts);
    for (const auto& s : samples) {
        // Direct evaluation of M r e^{-t} + int |phi| with M = ceil(R + S).
        const double M = std::max(1.0, std::ceil(s.R + s.S));
        const double lhs = M * s.R * std::exp(-s.T) + s.phi.integral(kId, s.T);
        slack = std::min(slack, res.rhs(s.R, s.S, s.T, s.phi) - lhs);
    }
    Outcome o;
    o.pass = samples.size() == 200 && res.certificate.pass && res.certificate.worst_slack >= -1e-6 &&
             slack >= -1e-6;
    o.detail = "certificate slack " + fmt(res.certificate.worst_slack) + ", recomputed slack " + fmt(slack);
    return o;
}

Outcome comparison_domination() {
    auto g = oracle::rng(50);
    const auto sigma = ComparisonFunction::power(2.0, 2.0);
    double worst = kInf;
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> xi{oracle::uniform(g, -3, 3)};
        const auto u = oracle::random_scalar_input(g, 10.0, 8, 2.0);
        const auto traj = simulate(linear(), xi, u, 10.0);
        std::vector<double> V;
        for (std::size_t j = 0; j < traj.size(); ++j) {
            V.push_back(traj.state(j)[0] * traj.state(j)[0]);
        }
        const double w0 = xi[0] * xi[0];
        const auto w = comparison_bound(u, sigma, kId, w0, 10.0);
        worst = std::min(worst, check_domination(traj.times, V, w, default_comparison_offset(w0)).margin);
    }
    return {worst >= -1e-6, "worst margin " + fmt(worst)};
}

double decay_error(double scale) {
    const ode::Rhs f = [](std::span<const double> y, std::span<double> dy) {
        dy[0] = -y[0];
        return true;
    };
    std::vector<double> y{1.0};
    std::vector<ode::DenseStep> steps;
    ode::Stats stats;
    ode::Options opt;
    opt.tolerance = {1e-8 * scale, 1e-6 * scale};
    (void)ode::integrate(f, 0.0, 1.0, y, opt, steps, stats);
    return std::abs(y[0] - std::exp(-1.0));
}

Outcome integrator_oracles() {
    const double err = decay_error(1.0);
    const double halved = decay_error(0.5);
    const double ratio = err / halved;
    const std::vector<double> one{1.0};
    const auto blow = simulate(parse_system("n=1 m=0\ndx1 = x1^2"), one, InputSignal(), 2.0);
    const double escape = blow.blowup ? blow.blowup->escape_time : kInf;
    Outcome o;
    o.pass = err <= 1e-6 && std::abs(escape - 1.0) <= 1e-3 && ratio >= 4.0;
    o.detail = "decay error " + fmt(err) + ", escape time " + fmt(escape) + ", error ratio under halving " +
               fmt(ratio);
    return o;
}

Outcome falsifier_determinism() {
    const auto sys = ce::system();
    const FalsifyRegion region{kHalfPi + 2.0, kHalfPi, 20.0, 8};
    bool identical = true;
    bool replays = true;
    std::size_t violated = 0;
    double worst_ratio = -kInf;
    for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
        FalsifyOptions opts;
        opts.budget = 200;
        opts.seed = seed;
        const auto a = falsify(sys, claim_spec(), region, opts);
        opts.jobs = 4;
        const auto b = falsify(sys, claim_spec(), region, opts);
        identical = identical && io::to_json(a) == io::to_json(b) &&
                    io::to_json(a) == io::to_json(falsify(sys, claim_spec(), region, opts));
        if (a.violated()) {
            ++violated;
            const auto r = replay_witness(sys, claim_spec(), *a.witness);
            replays = replays && r.margin <= 0.5 * a.margin;
            worst_ratio = std::max(worst_ratio, r.margin / a.margin);
        }
    }
    Outcome o;
    o.pass = identical && replays && violated > 0;
    o.detail = std::string("reports ") + (identical ? "byte-identical" : "differ") + ", " +
               std::to_string(violated) + " violated verdicts, smallest replay/original margin ratio " +
               fmt(worst_ratio);
    return o;
}

Outcome value_dissipation() {
    auto g = oracle::rng(80);
    double worst = kInf;
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> xi{oracle::uniform(g, -2, 2)};
        const double t = oracle::uniform(g, 0, 5);
        const auto u = oracle::random_scalar_input(g, std::max(t, 1e-3), 4, 1.5);
        const auto r = check_value_dissipation(linear(), kId, kId, xi, t, u, 32, static_cast<std::uint64_t>(i));
        worst = std::min(worst, r.margin);
    }
    return {worst >= -1e-6, "worst margin " + fmt(worst)};
}

Outcome auxiliary_checks() {
    auto g = oracle::rng(90);
    std::vector<AuxiliaryCase> cases;
    for (int i = 0; i < 100; ++i) {
        cases.push_back({{oracle::uniform(g, -3, 3)}, oracle::random_scalar_input(g, 10.0, 6, 1.0)});
    }
    const auto phi = ComparisonFunction::linear(0.25);
    const auto beta0 = ComparisonFunction::linear(2.0);
    const auto r = auxiliary_gain_check(linear(), phi, beta0, kId, kId, cases, 10.0);
    const double doubled = r.component("doubled_margin").value_or(-kInf);

    // RK4 oracle on the augmented state (x, int |d| |x| / 4).
    double oracle_worst = kInf;
    for (const auto& c : cases) {
        const oracle::Field f = [](const std::vector<double>& x, const std::vector<double>& d,
                                   std::vector<double>& dx) {
            dx[0] = -x[0] + d[0] * std::abs(x[0]) / 4;
            dx[1] = std::abs(d[0]) * std::abs(x[0]) / 4;
        };
        std::vector<double> state{c.xi[0], 0.0};
        double t = 0.0;
        for (int step = 0; step < 100; ++step) {
            const double next = 0.1 * (step + 1);
            const auto shifted = c.disturbance.shifted(t);
            state = oracle::rk4(f, state, shifted, next - t, 1e-3);
            t = next;
            oracle_worst = std::min(oracle_worst, 2 * 2 * std::abs(c.xi[0]) + 2 * state[1] - std::abs(state[0]));
        }
    }
    Outcome o;
    o.pass = doubled >= -1e-6 && oracle_worst >= -1e-6;
    o.detail = "doubled-bound margin " + fmt(doubled) + ", oracle margin " + fmt(oracle_worst);
    return o;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "counterexample equilibrium", 1.0, claim1_equilibrium},
        {2, "semiglobal bound suite", 30.0, claim2_bounds},
        {3, "construction chain", 5.0, construction_chain},
        {4, "uniformization", 10.0, uniformization},
        {5, "comparison domination", 10.0, comparison_domination},
        {6, "integrator oracles", kInf, integrator_oracles},
        {7, "falsifier determinism and replay", kInf, falsifier_determinism},
        {8, "value-function dissipation", kInf, value_dissipation},
        {9, "auxiliary-system checks", kInf, auxiliary_checks},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = elapsed < c.time_limit;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s criterion %d (%s): %s; %.3f s%s\n", pass ? "PASS" : "FAIL", c.number, c.name,
                    o.detail.c_str(), elapsed, in_time ? "" : " (over time limit)");
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
