#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "checking.hpp"
#include "iiss/errors.hpp"
#include "iiss/estimate_checker.hpp"

namespace iiss {

namespace {

constexpr std::uint32_t kSampleTag = 0x66616c73u;
constexpr std::uint32_t kRefineTag = 0x72656669u;
constexpr double kInf = std::numeric_limits<double>::infinity();

/// Normalized search point: the state block and each input segment lie in
/// unit balls and are scaled by the region radii.
struct Layout {
    std::size_t n;
    std::size_t m;
    std::size_t k;

    [[nodiscard]] std::size_t size() const noexcept { return n + m * k; }

    void project(std::vector<double>& z) const {
        project_block(z, 0, n);
        for (std::size_t j = 0; j < k; ++j) {
            project_block(z, n + j * m, m);
        }
    }

    static void project_block(std::vector<double>& z, std::size_t offset, std::size_t len) {
        const double r = norm(std::span<const double>(z.data() + offset, len));
        if (r > 1.0) {
            for (std::size_t i = 0; i < len; ++i) {
                z[offset + i] /= r;
            }
        }
    }
};

struct Candidate {
    std::vector<double> xi;
    InputSignal u;
};

Candidate decode(const Layout& layout, const std::vector<double>& z, const FalsifyRegion& region) {
    Candidate c;
    c.xi.resize(layout.n);
    for (std::size_t i = 0; i < layout.n; ++i) {
        c.xi[i] = region.state_radius * z[i];
    }
    if (layout.m == 0) {
        return c;
    }
    std::vector<std::vector<double>> values(layout.k, std::vector<double>(layout.m));
    for (std::size_t j = 0; j < layout.k; ++j) {
        for (std::size_t i = 0; i < layout.m; ++i) {
            values[j][i] = region.input_radius * z[layout.n + j * layout.m + i];
        }
    }
    c.u = InputSignal::uniform_segments(region.horizon, std::move(values));
    return c;
}

std::vector<double> sample_point(const Layout& layout, std::uint64_t seed, std::size_t index) {
    auto rng = detail::seeded_rng(seed, index, kSampleTag);
    std::vector<double> z;
    z.reserve(layout.size());
    auto xi = detail::random_ball_point(rng, layout.n, 1.0);
    if (index % 4 == 1 && layout.n > 0) {
        const double r = norm(xi);
        for (double& c : xi) {
            c = r > 0.0 ? c / r : c;
        }
    }
    z.insert(z.end(), xi.begin(), xi.end());
    if (layout.m == 0) {
        return z;
    }
    const bool constant = index % 2 == 0;
    auto first = detail::random_ball_point(rng, layout.m, 1.0);
    if (constant && index % 4 == 0) {
        const double r = norm(first);
        for (double& c : first) {
            c = r > 0.0 ? c / r : c;
        }
    }
    for (std::size_t j = 0; j < layout.k; ++j) {
        const auto v = (constant || j == 0) ? first : detail::random_ball_point(rng, layout.m, 1.0);
        z.insert(z.end(), v.begin(), v.end());
    }
    return z;
}

struct Evaluation {
    double score = kInf;
    std::optional<CheckReport> report;
};

Evaluation evaluate(const ControlSystem& sys, const EstimateSpec& spec, const FalsifyRegion& region,
                    const Layout& layout, const std::vector<double>& z, const CheckOptions& options) {
    Evaluation e;
    const Candidate c = decode(layout, z, region);
    try {
        e.report = detail::check_estimate_unvalidated(sys, spec, c.xi, c.u, region.horizon, options);
        const double m = e.report->margin;
        e.score = std::isnan(m) ? kInf : m;
    } catch (const Error&) {
        e.report.reset();
        e.score = kInf;
    }
    return e;
}

FalsifyRegion clipped_region(const EstimateSpec& spec, FalsifyRegion region) {
    if (spec.form == EstimateForm::Semiglobal) {
        region.state_radius = std::min(region.state_radius, spec.M);
        region.input_radius = std::min(region.input_radius, spec.M);
    }
    return region;
}

}  // namespace

CheckReport falsify(const ControlSystem& sys, const EstimateSpec& spec, const FalsifyRegion& requested,
                    const FalsifyOptions& options) {
    if (options.budget == 0) {
        throw DomainError("falsification budget must be at least 1");
    }
    if (!(requested.horizon > 0.0) || requested.segments == 0 || !(requested.state_radius >= 0.0) ||
        !(requested.input_radius >= 0.0)) {
        throw DomainError("falsification region needs a positive horizon and segment count");
    }
    spec.validate();
    const FalsifyRegion region = clipped_region(spec, requested);
    const Layout layout{sys.state_dim(), sys.input_dim(), region.segments};

    const std::size_t sampled = std::max<std::size_t>(1, options.budget / 2);
    std::vector<std::vector<double>> points(sampled);
    std::vector<Evaluation> results(sampled);
    const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, sampled);
    auto work = [&](std::size_t worker) {
        for (std::size_t i = worker; i < sampled; i += jobs) {
            points[i] = sample_point(layout, options.seed, i);
            results[i] = evaluate(sys, spec, region, layout, points[i], options.check);
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
            threads.emplace_back(work, w);
        }
        for (auto& t : threads) {
            t.join();
        }
    }

    std::size_t best_index = 0;
    for (std::size_t i = 1; i < sampled; ++i) {
        if (results[i].score < results[best_index].score) {
            best_index = i;
        }
    }
    std::vector<double> best = points[best_index];
    Evaluation best_eval = std::move(results[best_index]);

    const std::size_t refine = options.budget - std::min(options.budget, sampled);
    auto rng = detail::seeded_rng(options.seed, 0, kRefineTag);
    std::normal_distribution<double> gauss;
    double step = 0.2;
    std::size_t accepted = 0;
    for (std::size_t it = 0; it < refine && layout.size() > 0; ++it) {
        std::vector<double> trial = best;
        for (double& c : trial) {
            c += step * gauss(rng);
        }
        layout.project(trial);
        Evaluation e = evaluate(sys, spec, region, layout, trial, options.check);
        if (e.score < best_eval.score) {
            best = std::move(trial);
            best_eval = std::move(e);
            step = std::min(step * 1.5, 2.0);
            ++accepted;
        } else {
            step = std::max(step * std::pow(1.5, -0.25), 1e-6);
        }
    }

    CheckReport report;
    if (best_eval.report) {
        report = std::move(*best_eval.report);
    } else {
        report.form = std::string(to_string(spec.form));
        report.integrator = options.check.simulation.tolerance;
        report.margin = kInf;
        report.notes.push_back("no sample could be evaluated");
    }
    report.seed = options.seed;
    report.evaluations = sampled + refine;
    report.notes.push_back("search: " + std::to_string(sampled) + " seeded samples, " + std::to_string(refine) +
                           " refinement steps (" + std::to_string(accepted) + " accepted)");
    if (!report.violated()) {
        report.notes.push_back("no violation found; the estimate holds on the sampled trajectories only");
    }
    return report;
}

}  // namespace iiss
