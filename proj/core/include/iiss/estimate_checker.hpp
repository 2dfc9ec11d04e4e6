#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iiss/comparison_functions.hpp"
#include "iiss/expression.hpp"
#include "iiss/input_signal.hpp"
#include "iiss/system_model.hpp"

namespace iiss {

// ---------------------------------------------------------------------------
// Estimate specifications
// ---------------------------------------------------------------------------

enum class EstimateForm {
    IISS,             // alpha(|x|) <= beta(|xi|, t) + int sigma(|u|)
    Int2Int,          // int alpha(|x|) <= chi(|xi|) + int sigma(|u|)
    MixedLpLq,        // (int |x|^q)^(1/q) <= (|xi|^p + int sigma(|u|)^p)^(1/p)
    MixedInt,         // int alpha(|x|) <= chi(|xi| + int sigma(|u|))
    UBEBS,            // alpha(|x|) <= gamma(|xi|) + int sigma(|u|) + c
    MixedSup,         // alpha(|x|) <= beta(|xi|, t) + int sigma(|u|) + gamma(|u|_[0,t])
    MixedSupNoDecay,  // alpha(|x|) <= beta0(|xi|) + int sigma(|u|) + gamma(|u|_[0,t])
    Semiglobal,       // IISS restricted to |xi| <= M and |u|_inf <= M
    ISS,              // |x| <= beta(|xi|, t) + gamma(|u|_inf)
    AsymptoticGain,   // liminf |x| <= gamma(|u|_inf)
};

std::string_view to_string(EstimateForm f) noexcept;
/// Accepts the upper-case tags, e.g. "IISS", "MIXED_LPLQ". Throws SpecError.
EstimateForm estimate_form_from_string(std::string_view s);
bool is_integral_form(EstimateForm f) noexcept;

struct EstimateSpec {
    EstimateForm form = EstimateForm::IISS;
    /// Scalar slots: alpha, sigma, chi, gamma, beta0.
    std::map<std::string, ComparisonFunction> functions;
    std::optional<KLFunction> beta;
    double p = 2.0;
    double q = 2.0;
    double c = 0.0;
    double M = 0.0;

    /// Names of the slots the form needs ("beta" is the KL slot).
    static std::vector<std::string> required_slots(EstimateForm form);

    /// Throws SpecError for a missing slot or parameter and ClassError when
    /// a slot fails its class check.
    void validate() const;
    [[nodiscard]] const ComparisonFunction& function(const std::string& name) const;
};

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class Verdict { HoldsOnSamples, Violated };

std::string_view to_string(Verdict v) noexcept;

struct Witness {
    std::vector<double> xi;
    InputSignal input;
    double time = 0.0;
    double horizon = 0.0;
};

struct CheckReport {
    std::string form;
    Verdict verdict = Verdict::HoldsOnSamples;
    /// min over samples of RHS - LHS.
    double margin = 0.0;
    double tolerance = 0.0;
    std::optional<Witness> witness;
    std::uint64_t seed = 0;
    std::size_t evaluations = 0;
    ode::Tolerance integrator;
    std::vector<std::pair<std::string, double>> components;
    std::vector<std::string> notes;

    [[nodiscard]] bool violated() const noexcept { return verdict == Verdict::Violated; }
    [[nodiscard]] std::optional<double> component(std::string_view name) const;
};

struct CheckOptions {
    /// Violated when margin < -(absolute + relative * max |LHS|).
    CertificateTolerance tolerance;
    SimulationOptions simulation;
};

// ---------------------------------------------------------------------------
// Trajectory checks
// ---------------------------------------------------------------------------

/// Pointwise forms, evaluated at every trajectory sample.
CheckReport check_pointwise(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                            const EstimateSpec& spec, const CheckOptions& options = {});

/// Integral forms; state integrals use the trajectory's continuous extension.
CheckReport check_integral(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                           const EstimateSpec& spec, const CheckOptions& options = {});

/// Dispatches on the form.
CheckReport check_trajectory(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                             const EstimateSpec& spec, const CheckOptions& options = {});

/// Simulates over [0, horizon] and checks.
CheckReport check_estimate(const ControlSystem& sys, const EstimateSpec& spec, std::span<const double> xi,
                           const InputSignal& u, double horizon, const CheckOptions& options = {});

// ---------------------------------------------------------------------------
// Falsification
// ---------------------------------------------------------------------------

struct FalsifyRegion {
    double state_radius = 1.0;
    double input_radius = 1.0;
    double horizon = 10.0;
    std::size_t segments = 8;
};

struct FalsifyOptions {
    std::size_t budget = 200;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    CheckOptions check;
};

/// Seeded random sampling of (xi, u) followed by a (1+1) evolution strategy
/// on the n + m*k parameter vector, minimizing the margin.
CheckReport falsify(const ControlSystem& sys, const EstimateSpec& spec, const FalsifyRegion& region,
                    const FalsifyOptions& options = {});

/// Re-simulates a witness with both integrator tolerances scaled by `factor`.
CheckReport replay_witness(const ControlSystem& sys, const EstimateSpec& spec, const Witness& witness,
                           const CheckOptions& options = {}, double factor = 0.1);

// ---------------------------------------------------------------------------
// Comparison and dissipation
// ---------------------------------------------------------------------------

/// w' = sigma(|u|) - rho_star(w), w(0) = w0, with samples clamped to w >= 0.
Trajectory comparison_bound(const InputSignal& u, const ComparisonFunction& sigma,
                            const ComparisonFunction& rho_star, double w0, double horizon,
                            const SimulationOptions& options = {});

/// Default offset of the shifted comparison problem: 1e-8 (1 + w0).
double default_comparison_offset(double w0) noexcept;

/// margin = min_j (w(t_j) + eps - V_j). Throws DomainError on mismatched
/// samples or times outside w.
CheckReport check_domination(const std::vector<double>& times, const std::vector<double>& values,
                             const Trajectory& w, double epsilon, const CheckOptions& options = {});

/// (x, u) sample for dissipation checks.
struct StateInputSample {
    std::vector<double> x;
    std::vector<double> u;
};

/// grad V(x) . f(x, u) <= -rho(|x|) + sigma(|u|), gradient by central differences.
CheckReport check_lyapunov_dissipation(const ControlSystem& sys, const Expression& V,
                                       const ComparisonFunction& rho, const ComparisonFunction& sigma,
                                       const std::vector<StateInputSample>& samples,
                                       const CheckOptions& options = {});

/// grad V(x) . f(x, u) <= theta(|x|) delta(|u|).
CheckReport check_lyapunov_product(const ControlSystem& sys, const Expression& V, const ComparisonFunction& theta,
                                   const ComparisonFunction& delta, const std::vector<StateInputSample>& samples,
                                   const CheckOptions& options = {});

/// Central-difference gradient with step 1e-6 (1 + |x|).
std::vector<double> numeric_gradient(const Expression& V, std::span<const double> x);

// ---------------------------------------------------------------------------
// Value function
// ---------------------------------------------------------------------------

struct ValueSearchOptions {
    double horizon = 10.0;
    std::size_t segments = 4;
    double input_radius = 1.0;
    CheckOptions check;
};

struct ValueEstimate {
    std::vector<double> xi;
    double value = 0.0;
    double time = 0.0;
    InputSignal input;
    std::size_t evaluated = 0;
};

/// Member `index` of the seeded suffix family; member 0 is u = 0.
InputSignal value_search_input(std::size_t index, std::size_t input_dim, std::uint64_t seed,
                               const ValueSearchOptions& options = {});

/// Lower bound of sup_{t,u} alpha(|x(t)|) - int_0^t sigma1(|u|) over the
/// first `budget` members of the seeded family.
ValueEstimate estimate_value_function(const ControlSystem& sys, const ComparisonFunction& alpha,
                                      const ComparisonFunction& sigma1, std::span<const double> xi,
                                      std::size_t budget, std::uint64_t seed,
                                      const ValueSearchOptions& options = {});

/// Family-level dissipation: V(x(t)) - V+(xi) <= int_0^t sigma1(|u|), where
/// V+ also ranges over u followed by every suffix used at x(t).
CheckReport check_value_dissipation(const ControlSystem& sys, const ComparisonFunction& alpha,
                                    const ComparisonFunction& sigma1, std::span<const double> xi, double t,
                                    const InputSignal& u, std::size_t budget, std::uint64_t seed,
                                    const ValueSearchOptions& options = {});

// ---------------------------------------------------------------------------
// Forward completeness and auxiliary-system checks
// ---------------------------------------------------------------------------

struct GrowthBound {
    ComparisonFunction time_gain;      // kappa_1
    ComparisonFunction state_gain;     // kappa_2
    ComparisonFunction energy_gain;    // kappa_3
    ComparisonFunction input_weight;   // gamma
    double offset = 0.0;               // c
};

/// |x(t)| <= kappa_1(t) + kappa_2(|xi|) + kappa_3(int gamma(|u|)) + c at all samples.
CheckReport check_forward_complete_bound(const Trajectory& traj, const InputSignal& u, std::span<const double> xi,
                                         const GrowthBound& bound, const CheckOptions& options = {});

struct ReachOptions {
    std::size_t budget = 64;
    std::uint64_t seed = 0;
    /// Inputs act on [0, input_horizon] and vanish afterwards.
    double input_horizon = 5.0;
    double horizon = 20.0;
    std::size_t segments = 4;
    double input_radius = 4.0;
    CheckOptions check;
};

/// Sampled max of |x| over |xi| <= r and int delta(|u|) <= r with
/// delta = max(gamma, sigma), against
/// kappa_1(chi(2r) / alpha(r)) + kappa_2(r) + kappa_3(r) + c.
CheckReport reach_bound_m(const ControlSystem& sys, double r, const GrowthBound& bound,
                          const ComparisonFunction& alpha, const ComparisonFunction& chi,
                          const ComparisonFunction& sigma, const ReachOptions& options = {});

struct AuxiliaryCase {
    std::vector<double> xi;
    InputSignal disturbance;
};

/// Closed loop x' = f(x, d phi(|x|)); checks
///   alpha(|x|)/2 - int gamma(|d| phi(|x|)) <= beta0(|xi|)       (z-bound)
///   alpha(|x|) <= 2 beta0(|xi|) + 2 int gamma(|d| phi(|x|))      (doubled)
/// after certifying gamma(phi(s)) <= alpha(s)/2 on a grid. Throws SpecError
/// when that certificate fails.
CheckReport auxiliary_gain_check(const ControlSystem& sys, const ComparisonFunction& phi,
                                 const ComparisonFunction& beta0, const ComparisonFunction& alpha,
                                 const ComparisonFunction& gamma, const std::vector<AuxiliaryCase>& cases,
                                 double horizon, const CheckOptions& options = {});

}  // namespace iiss
