#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iiss/comparison_functions.hpp"

namespace iiss {

/// Euclidean norm.
double norm(std::span<const double> v) noexcept;

/// Piecewise-constant signal u : [0, inf) -> R^m.
///
/// Segment i covers [t_i, t_{i+1}); the last segment extends to infinity.
/// Breakpoints start at 0 and are strictly increasing.
class InputSignal {
public:
    /// Zero-dimensional signal (systems without inputs).
    InputSignal();
    InputSignal(std::vector<double> breakpoints, std::vector<std::vector<double>> values);

    static InputSignal constant(std::vector<double> value);
    static InputSignal zero(std::size_t dim);
    /// k equal segments over [0, horizon]; the last value persists afterwards.
    static InputSignal uniform_segments(double horizon, std::vector<std::vector<double>> values);

    /// Rows of `t v1 ... vm`; `#` starts a comment. The first row must have t = 0.
    static InputSignal parse(std::string_view text);
    [[nodiscard]] std::string to_text() const;

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t segments() const noexcept { return breakpoints_.size(); }
    [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    [[nodiscard]] std::span<const double> segment_value(std::size_t i) const;
    [[nodiscard]] std::size_t segment_index(double t) const;
    /// Right-continuous value u(t).
    [[nodiscard]] std::span<const double> value_at(double t) const;

    /// max_i |v_i| over every segment.
    [[nodiscard]] double sup_norm() const noexcept;
    /// Essential sup of |u| over [0, t] (segment 0 when t = 0).
    [[nodiscard]] double sup_norm(double t) const;
    /// Exact integral of sigma(|u(s)|) over [0, t].
    [[nodiscard]] double integral(const ComparisonFunction& sigma, double t) const;
    /// Exact integral of g(|u(s)|) over [0, t].
    [[nodiscard]] double integral_of(const std::function<double(double)>& g, double t) const;

    /// s -> u(s + tau).
    [[nodiscard]] InputSignal shifted(double tau) const;

    friend bool operator==(const InputSignal&, const InputSignal&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> breakpoints_;
    std::vector<double> values_;  // segments() x dim_, row major
};

/// Radial projection of every value into the closed ball of radius M.
InputSignal saturate(const InputSignal& u, double radius);

/// u on [0, tau), v(. - tau) afterwards.
InputSignal concat(const InputSignal& u, const InputSignal& v, double tau);

}  // namespace iiss
