#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>
#include <span>
#include <string>

#include "iiss/estimate_checker.hpp"

namespace iiss::detail {

/// Tracks min(RHS - LHS) and the largest |LHS| seen.
class MarginAccumulator {
public:
    void add(double lhs, double rhs, double time) {
        double slack = rhs - lhs;
        if (!std::isfinite(lhs) || std::isnan(rhs) || std::isnan(slack)) {
            slack = -std::numeric_limits<double>::infinity();
        } else {
            lhs_scale_ = std::max(lhs_scale_, std::abs(lhs));
        }
        if (!seen_ || slack < margin_) {
            margin_ = slack;
            time_ = time;
            lhs_ = lhs;
            rhs_ = rhs;
            seen_ = true;
        }
    }

    [[nodiscard]] bool empty() const noexcept { return !seen_; }
    [[nodiscard]] double margin() const noexcept { return seen_ ? margin_ : 0.0; }
    [[nodiscard]] double time() const noexcept { return time_; }
    [[nodiscard]] double lhs() const noexcept { return lhs_; }
    [[nodiscard]] double rhs() const noexcept { return rhs_; }
    [[nodiscard]] double tolerance(const CertificateTolerance& tol) const noexcept {
        return tol.absolute + tol.relative * lhs_scale_;
    }

    /// Fills margin, tolerance and verdict.
    void finish(CheckReport& report, const CertificateTolerance& tol) const {
        report.margin = margin();
        report.tolerance = tolerance(tol);
        report.verdict = report.margin < -report.tolerance ? Verdict::Violated : Verdict::HoldsOnSamples;
    }

private:
    double margin_ = 0.0;
    double time_ = 0.0;
    double lhs_ = 0.0;
    double rhs_ = 0.0;
    double lhs_scale_ = 0.0;
    bool seen_ = false;
};

/// The public entry points validate the spec first; these skip that step.
CheckReport check_trajectory_unvalidated(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                                         const EstimateSpec& spec, const CheckOptions& options);
CheckReport check_estimate_unvalidated(const ControlSystem& sys, const EstimateSpec& spec,
                                       std::span<const double> xi, const InputSignal& u, double horizon,
                                       const CheckOptions& options);

std::string format_number(double v);

/// Independent stream for member `index` of a seeded family.
std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t index, std::uint32_t tag);

/// Uniform sample from the closed ball of radius `radius`.
std::vector<double> random_ball_point(std::mt19937_64& rng, std::size_t dim, double radius);

}  // namespace iiss::detail
