#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iiss/comparison_functions.hpp"
#include "iiss/input_signal.hpp"
#include "iiss/ode.hpp"

namespace iiss {

/// x' = f(x, u) with x in R^n, u in R^m.
class ControlSystem {
public:
    using Field = std::function<void(std::span<const double> x, std::span<const double> u, std::span<double> dx)>;

    /// Evaluates f(0, 0) and records a warning when it is not zero.
    ControlSystem(std::size_t n, std::size_t m, Field field, std::string source = {});

    [[nodiscard]] std::size_t state_dim() const noexcept { return n_; }
    [[nodiscard]] std::size_t input_dim() const noexcept { return m_; }
    void evaluate(std::span<const double> x, std::span<const double> u, std::span<double> dx) const;
    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    std::size_t n_;
    std::size_t m_;
    Field field_;
    std::string source_;
    std::vector<std::string> warnings_;
};

/// Parses `n=<int> m=<int>` followed by `dx<i> = <expr>` statements.
/// Statements are separated by newlines or ';' and `#` starts a comment.
/// Without a header, n is the number of equations and m the largest input
/// index referenced. Throws ParseError.
ControlSystem parse_system(std::string_view source);

enum class TrajectoryStatus { Completed, FiniteEscape, StepFailure };

std::string_view to_string(TrajectoryStatus s) noexcept;

struct BlowupReport {
    double escape_time = 0.0;
    std::vector<double> last_state;
    double norm = 0.0;
};

/// Samples at every accepted step end plus the continuous extension.
struct Trajectory {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> times;
    std::vector<double> states;  // times.size() x n
    std::vector<ode::DenseStep> steps;
    /// Input value held during each step.
    std::vector<std::vector<double>> step_inputs;
    TrajectoryStatus status = TrajectoryStatus::Completed;
    std::string message;
    std::optional<BlowupReport> blowup;
    ode::Stats stats;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] double end_time() const noexcept { return times.back(); }
    [[nodiscard]] std::span<const double> state(std::size_t j) const;
    [[nodiscard]] double state_norm(std::size_t j) const { return norm(state(j)); }
    /// Continuous extension at t in [0, end_time()].
    [[nodiscard]] std::vector<double> state_at(double t) const;

    /// Running integral of g(x(s), u(s)) at every sample time, by
    /// three-point Gauss quadrature on each step.
    [[nodiscard]] std::vector<double> running_integral(
        const std::function<double(std::span<const double> x, std::span<const double> u)>& g) const;
};

struct SimulationOptions {
    ode::Tolerance tolerance;
    double blowup_threshold = 1e12;
    std::size_t max_steps = 1'000'000;
};

/// Integrates from xi over [0, horizon], restarting at input breakpoints.
Trajectory simulate(const ControlSystem& sys, std::span<const double> xi, const InputSignal& u, double horizon,
                    const SimulationOptions& options = {});

/// x' = f(x, d * phi(|x|)) driven by d.
struct ClosedLoop {
    ControlSystem system;
    InputSignal disturbance;
};

/// Throws DomainError when sup |d| > 1 or dimensions disagree.
ClosedLoop close_loop(const ControlSystem& sys, const ComparisonFunction& phi, const InputSignal& d);

/// Header `t,x1..xn,u1..um`, preceded by `# ` comment lines.
std::string trajectory_csv(const Trajectory& traj, const InputSignal& u, const std::vector<std::string>& comments = {});

}  // namespace iiss
