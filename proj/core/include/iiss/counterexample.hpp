#pragma once

#include <span>
#include <vector>

#include "iiss/comparison_functions.hpp"
#include "iiss/estimate_checker.hpp"
#include "iiss/input_signal.hpp"
#include "iiss/system_model.hpp"

namespace iiss::counterexample {

/// x1' = -x1 (1 - sin x2),  x2' = -x2 + u.
ControlSystem system();

/// x2(t) = xi2 e^{-t} + int_0^t e^{s-t} u(s) ds, summed segment by segment.
double closed_form_x2(double xi2, const InputSignal& u, double t);

/// |xi2| e^{-t} + |u|_[0,t] - |x2(t)|.
double x2_bound_margin(double xi2, const InputSignal& u, double t);

/// Simulates from xi over [0, horizon] and checks
///   |x1(t)| <= |xi1| e^{|xi2|} e^{-t/2}   when |u|_inf <= 1/2,
///   |x1(t)| <= |xi1| e^{|xi2|}            otherwise.
CheckReport check_x1_bound(std::span<const double> xi, const InputSignal& u, double horizon,
                           const CheckOptions& options = {});

struct NotIssWitness {
    std::vector<double> xi;
    InputSignal input;
    Trajectory trajectory;
    /// gamma(|u|) - limsup |x|; negative when the asymptotic gain bound fails.
    CheckReport report;
};

/// xi = (gamma(pi/2) + 1, pi/2) under u = pi/2. The limsup is the max of |x|
/// over the last 20% of the horizon.
NotIssWitness not_iss_witness(const ComparisonFunction& gamma, double horizon = 50.0,
                              const CheckOptions& options = {});

struct SemiglobalGain {
    KLFunction beta;            // s e^s e^{-t/2}
    ComparisonFunction gamma;   // 2 M e^M r
};

SemiglobalGain semiglobal_gain(double M);

/// |x(t)| <= beta(|xi|, t) + gamma_M(|u|_inf) + |xi2| e^{-t} + |u|_inf for |xi| <= M.
CheckReport check_semiglobal_bound(std::span<const double> xi, const InputSignal& u, double horizon, double M,
                                   const CheckOptions& options = {});

}  // namespace iiss::counterexample
