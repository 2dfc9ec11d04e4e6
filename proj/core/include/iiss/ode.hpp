#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace iiss::ode {

struct Tolerance {
    double absolute = 1e-8;
    double relative = 1e-6;
};

/// Writes dy = f(y); returns false when the field cannot be evaluated.
using Rhs = std::function<bool(std::span<const double> y, std::span<double> dy)>;

/// One accepted Dormand-Prince step with its continuous extension.
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    /// Valid end of the step (shorter than t0 + h after an escape).
    double t_end = 0.0;
    std::vector<double> coeffs;  // 5 x n

    [[nodiscard]] std::size_t dim() const noexcept { return coeffs.size() / 5; }
    void evaluate(double t, std::span<double> out) const;
};

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
};

struct Options {
    Tolerance tolerance;
    double blowup_threshold = 1e12;
    std::size_t max_steps = 1'000'000;
};

enum class Stop { Reached, Escape, StepFailure };

struct SegmentResult {
    Stop stop = Stop::Reached;
    double t = 0.0;
    std::string message;
};

/// Integrate y' = f(y) from t0 to t1, appending accepted steps.
///
/// On return `y` holds the state at the returned time. For an escape the
/// time is where the continuous extension first crosses the blow-up
/// threshold, located by bisection inside the last step.
SegmentResult integrate(const Rhs& f, double t0, double t1, std::vector<double>& y, const Options& options,
                        std::vector<DenseStep>& steps, Stats& stats);

}  // namespace iiss::ode
