#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <iiss/errors.hpp>
#include <iiss/estimate_checker.hpp>

#include "oracles.hpp"

using namespace iiss;

namespace {

const ComparisonFunction kId = ComparisonFunction::identity();

ControlSystem linear() { return parse_system("n=1 m=1\ndx1 = -x1 + u1"); }

ControlSystem counterexample() {
    return parse_system("n=2 m=1\ndx1 = -x1*(1 - sin(x2))\ndx2 = -x2 + u1");
}

EstimateSpec iiss_spec() {
    EstimateSpec s;
    s.form = EstimateForm::IISS;
    s.functions = {{"alpha", kId}, {"sigma", kId}};
    s.beta = KLFunction::exponential();
    return s;
}

EstimateSpec iss_spec() {
    EstimateSpec s;
    s.form = EstimateForm::ISS;
    s.functions = {{"gamma", kId}};
    s.beta = KLFunction::exponential();
    return s;
}

}  // namespace

TEST(EstimateSpec, Validation) {
    EXPECT_NO_THROW(iiss_spec().validate());
    EstimateSpec missing = iiss_spec();
    missing.functions.erase("sigma");
    EXPECT_THROW(missing.validate(), SpecError);
    EstimateSpec wrong = iiss_spec();
    wrong.functions.at("alpha") = ComparisonFunction::saturating(1.0);
    EXPECT_THROW(wrong.validate(), ClassError);
    EstimateSpec semi = iiss_spec();
    semi.form = EstimateForm::Semiglobal;
    EXPECT_THROW(semi.validate(), SpecError);
    semi.M = 2.0;
    EXPECT_NO_THROW(semi.validate());
}

TEST(EstimateSpec, FormTags) {
    for (auto f : {EstimateForm::IISS, EstimateForm::Int2Int, EstimateForm::MixedLpLq, EstimateForm::MixedInt,
                   EstimateForm::UBEBS, EstimateForm::MixedSup, EstimateForm::MixedSupNoDecay,
                   EstimateForm::Semiglobal, EstimateForm::ISS, EstimateForm::AsymptoticGain}) {
        EXPECT_EQ(estimate_form_from_string(to_string(f)), f);
    }
    EXPECT_EQ(estimate_form_from_string("MIXED_LPLQ"), EstimateForm::MixedLpLq);
    EXPECT_THROW((void)estimate_form_from_string("LISS"), SpecError);
}

TEST(CheckPointwise, LinearIissHolds) {
    const std::vector<double> xi{1.0};
    const auto u = InputSignal::constant({0.5});
    const auto r = check_estimate(linear(), iiss_spec(), xi, u, 10.0);
    EXPECT_FALSE(r.violated());
    EXPECT_GE(r.margin, 0.0);
}

TEST(CheckPointwise, CounterexampleIssViolated) {
    const double h = std::numbers::pi / 2;
    const std::vector<double> xi{h + 1.0, h};
    const auto r = check_estimate(counterexample(), iss_spec(), xi, InputSignal::constant({h}), 30.0);
    EXPECT_TRUE(r.violated());
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_EQ(r.witness->xi, xi);
}

TEST(CheckPointwise, UbebsAtTimeZero) {
    EstimateSpec s;
    s.form = EstimateForm::UBEBS;
    s.functions = {{"alpha", kId}, {"gamma", kId}, {"sigma", kId}};
    s.c = 0.0;
    const std::vector<double> xi{2.0};
    const auto traj = simulate(linear(), xi, InputSignal::zero(1), 1e-3);
    const auto r = check_pointwise(traj, InputSignal::zero(1), xi, s);
    EXPECT_GE(r.margin, 0.0);
    EXPECT_FALSE(r.violated());
}

TEST(CheckPointwise, MixedSupHoldsOnLinearSystem) {
    EstimateSpec s;
    s.form = EstimateForm::MixedSup;
    s.functions = {{"alpha", kId}, {"gamma", kId}, {"sigma", kId}};
    s.beta = KLFunction::exponential();
    // |x| <= |xi| e^{-t} + |u|_[0,t] for x' = -x + u.
    auto g = oracle::rng(21);
    for (int i = 0; i < 20; ++i) {
        const std::vector<double> xi{oracle::uniform(g, -3, 3)};
        const auto u = oracle::random_scalar_input(g, 10.0, 5, 2.0);
        EXPECT_FALSE(check_estimate(linear(), s, xi, u, 10.0).violated());
    }
}

TEST(CheckPointwise, MissingSlotIsError) {
    EstimateSpec s = iss_spec();
    s.beta.reset();
    const std::vector<double> xi{1.0};
    EXPECT_THROW((void)check_estimate(linear(), s, xi, InputSignal::zero(1), 1.0), SpecError);
}

TEST(CheckPointwise, SemiglobalOutsideRegion) {
    EstimateSpec s = iiss_spec();
    s.form = EstimateForm::Semiglobal;
    s.M = 1.0;
    const std::vector<double> xi{2.0};
    EXPECT_THROW((void)check_estimate(linear(), s, xi, InputSignal::zero(1), 1.0), DomainError);
}

TEST(CheckIntegral, Int2IntClosedForm) {
    EstimateSpec s;
    s.form = EstimateForm::Int2Int;
    s.functions = {{"alpha", kId}, {"chi", kId}, {"sigma", kId}};
    const std::vector<double> xi{1.0};
    const auto sys = parse_system("n=1 m=1\ndx1 = -x1");
    const auto r = check_estimate(sys, s, xi, InputSignal::zero(1), 10.0);
    EXPECT_FALSE(r.violated());
    EXPECT_NEAR(*r.component("lhs"), 1.0 - std::exp(-10.0), 1e-6);
    EXPECT_NEAR(r.margin, std::exp(-10.0), 1e-6);
}

TEST(CheckIntegral, EquilibriumMarginZero) {
    for (auto form : {EstimateForm::Int2Int, EstimateForm::MixedInt, EstimateForm::MixedLpLq}) {
        EstimateSpec s;
        s.form = form;
        s.functions = {{"alpha", kId}, {"chi", kId}, {"sigma", kId}};
        const std::vector<double> xi{0.0};
        const auto r = check_estimate(linear(), s, xi, InputSignal::zero(1), 5.0);
        EXPECT_EQ(r.margin, 0.0) << to_string(form);
    }
}

TEST(CheckIntegral, MixedLpLqBatch) {
    // ||x||_2 <= |xi| / sqrt(2) + ||u||_2 for x' = -x + u, so sigma = 2r
    // gives slack: (|xi|^2 + 4 int u^2)^(1/2) >= |xi| / sqrt(2) + ||u||_2.
    EstimateSpec s;
    s.form = EstimateForm::MixedLpLq;
    s.functions = {{"sigma", ComparisonFunction::linear(2.0)}};
    auto g = oracle::rng(31);
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 30; ++i) {
        const std::vector<double> xi{oracle::uniform(g, -2, 2)};
        const auto u = oracle::random_scalar_input(g, 10.0, 6, 2.0);
        worst = std::min(worst, check_estimate(linear(), s, xi, u, 10.0).margin);
    }
    EXPECT_GE(worst, 0.0);
}

TEST(CheckEstimate, FormEquivalenceSign) {
    // MIXED_INT with chi(r) built from INT2INT data via gamma := chi^{-1}:
    // int alpha <= chi(|xi|) + int sigma  implies  int alpha <= chi2(|xi| + int sigma)
    // with chi2 = 2 max(chi, id); check the sign of the margins agrees.
    EstimateSpec a;
    a.form = EstimateForm::Int2Int;
    a.functions = {{"alpha", kId}, {"chi", kId}, {"sigma", kId}};
    EstimateSpec b;
    b.form = EstimateForm::MixedInt;
    b.functions = {{"alpha", kId}, {"chi", ComparisonFunction::linear(2.0)}, {"sigma", kId}};
    auto g = oracle::rng(41);
    for (int i = 0; i < 20; ++i) {
        const std::vector<double> xi{oracle::uniform(g, -3, 3)};
        const auto u = oracle::random_scalar_input(g, 8.0, 4, 2.0);
        const auto ra = check_estimate(linear(), a, xi, u, 8.0);
        const auto rb = check_estimate(linear(), b, xi, u, 8.0);
        EXPECT_EQ(ra.violated(), rb.violated());
        if (!ra.violated()) {
            EXPECT_GE(rb.margin, -rb.tolerance);
        }
    }
}

TEST(CheckEstimate, AsymptoticGainNotesHorizon) {
    EstimateSpec s;
    s.form = EstimateForm::AsymptoticGain;
    s.functions = {{"gamma", kId}};
    const std::vector<double> xi{5.0};
    const auto r = check_estimate(linear(), s, xi, InputSignal::constant({1.0}), 20.0);
    EXPECT_FALSE(r.violated());
    EXPECT_FALSE(r.notes.empty());
}

TEST(ComparisonBound, Examples) {
    const auto zero = InputSignal::zero(1);
    const auto w1 = comparison_bound(zero, kId, kId, 1.0, 3.0);
    EXPECT_NEAR(w1.state(w1.size() - 1)[0], std::exp(-3.0), 1e-6);
    const auto one = InputSignal::constant({1.0});
    const auto w2 = comparison_bound(one, kId, kId, 0.0, 3.0);
    EXPECT_NEAR(w2.state(w2.size() - 1)[0], 1.0 - std::exp(-3.0), 1e-6);
    const auto w3 = comparison_bound(zero, kId, ComparisonFunction::power(1.0, 2.0), 1.0, 3.0);
    EXPECT_NEAR(w3.state(w3.size() - 1)[0], 0.25, 1e-6);
    for (std::size_t j = 0; j < w3.size(); ++j) {
        EXPECT_GE(w3.state(j)[0], 0.0);
    }
    EXPECT_THROW((void)comparison_bound(zero, kId, kId, -1.0, 1.0), DomainError);
}

TEST(CheckDomination, Examples) {
    const std::vector<double> xi{1.0};
    const auto traj = simulate(linear(), xi, InputSignal::zero(1), 5.0);
    std::vector<double> values;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        values.push_back(traj.state(j)[0] * traj.state(j)[0]);
    }
    const auto sigma = ComparisonFunction::power(1.0, 2.0);
    const auto w = comparison_bound(InputSignal::zero(1), sigma, kId, 1.0, 5.0);
    const auto r = check_domination(traj.times, values, w, default_comparison_offset(1.0));
    EXPECT_FALSE(r.violated());
    EXPECT_GE(r.margin, 0.0);

    const std::vector<double> zeros(traj.size(), 0.0);
    EXPECT_GE(check_domination(traj.times, zeros, w, 0.0).margin, 0.0);

    const std::vector<double> short_values{1.0};
    EXPECT_THROW((void)check_domination(traj.times, short_values, w, 0.0), DomainError);
}

TEST(CheckDomination, ForcedCase) {
    const std::vector<double> xi{1.0};
    const auto u = InputSignal::constant({1.0});
    const auto traj = simulate(linear(), xi, u, 10.0);
    std::vector<double> values;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        values.push_back(traj.state(j)[0] * traj.state(j)[0]);
    }
    const auto w = comparison_bound(u, ComparisonFunction::power(2.0, 2.0), kId, 1.0, 10.0);
    const auto r = check_domination(traj.times, values, w, default_comparison_offset(1.0));
    EXPECT_GT(r.margin, 0.0);
}

TEST(LyapunovDissipation, Examples) {
    const auto V = Expression::parse("x1^2", {"x1"});
    const auto sq = ComparisonFunction::power(1.0, 2.0);
    std::vector<StateInputSample> samples{{{0.0}, {0.0}}};
    const auto zero = check_lyapunov_dissipation(linear(), V, sq.with_class(FunctionClass::PositiveDefinite), sq,
                                                 samples);
    EXPECT_EQ(zero.margin, 0.0);

    auto g = oracle::rng(51);
    samples.clear();
    for (int i = 0; i < 10000; ++i) {
        samples.push_back({{oracle::uniform(g, -10, 10)}, {oracle::uniform(g, -10, 10)}});
    }
    const auto r = check_lyapunov_dissipation(linear(), V, sq.with_class(FunctionClass::PositiveDefinite), sq,
                                              samples);
    EXPECT_GE(r.margin, -1e-6);
    EXPECT_FALSE(r.violated());
}

TEST(LyapunovDissipation, ProductVariant) {
    // d/dt x^2 = 2x(-x + u) <= 2|x||u|.
    const auto V = Expression::parse("x1^2", {"x1"});
    auto g = oracle::rng(52);
    std::vector<StateInputSample> samples;
    for (int i = 0; i < 500; ++i) {
        samples.push_back({{oracle::uniform(g, -5, 5)}, {oracle::uniform(g, -5, 5)}});
    }
    EXPECT_FALSE(check_lyapunov_product(linear(), V, ComparisonFunction::linear(2.0), kId, samples).violated());
    EXPECT_TRUE(check_lyapunov_product(linear(), V, ComparisonFunction::linear(0.1), kId, samples).violated());
}

TEST(LyapunovDissipation, GradientCrossCheck) {
    const auto V = Expression::parse("x1^4 + 3*x1*x2^2 - x2^3", {"x1", "x2"});
    auto g = oracle::rng(53);
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> x{oracle::uniform(g, -5, 5), oracle::uniform(g, -5, 5)};
        const auto grad = numeric_gradient(V, x);
        const double d1 = 4 * std::pow(x[0], 3) + 3 * x[1] * x[1];
        const double d2 = 6 * x[0] * x[1] - 3 * x[1] * x[1];
        const double scale = std::max(1.0, std::hypot(d1, d2));
        EXPECT_LE(std::abs(grad[0] - d1), 1e-5 * scale);
        EXPECT_LE(std::abs(grad[1] - d2), 1e-5 * scale);
    }
}

TEST(ForwardComplete, Examples) {
    const GrowthBound bound{ComparisonFunction::linear(0.0, FunctionClass::K), kId, kId, kId, 0.0};
    auto g = oracle::rng(61);
    for (int i = 0; i < 20; ++i) {
        const std::vector<double> xi{oracle::uniform(g, -3, 3)};
        const auto u = oracle::random_scalar_input(g, 10.0, 5, 2.0);
        const auto traj = simulate(linear(), xi, u, 10.0);
        EXPECT_FALSE(check_forward_complete_bound(traj, u, xi, bound).violated());
    }
    const std::vector<double> origin{0.0};
    const auto rest = simulate(linear(), origin, InputSignal::zero(1), 5.0);
    EXPECT_GE(check_forward_complete_bound(rest, InputSignal::zero(1), origin, bound).margin, 0.0);

    const auto sq = parse_system("n=1 m=1\ndx1 = x1^2");
    const std::vector<double> one{1.0};
    const auto blow = simulate(sq, one, InputSignal::zero(1), 2.0);
    const GrowthBound generous{ComparisonFunction::linear(100.0), ComparisonFunction::linear(100.0), kId, kId, 10.0};
    EXPECT_TRUE(check_forward_complete_bound(blow, InputSignal::zero(1), one, generous).violated());
}

TEST(ReachBound, LinearSystem) {
    const GrowthBound bound{ComparisonFunction::linear(0.0, FunctionClass::K), kId, kId, kId, 0.0};
    const auto r = reach_bound_m(linear(), 1.0, bound, kId, kId, kId);
    EXPECT_FALSE(r.violated());
    EXPECT_LE(*r.component("reach"), 2.0);
    EXPECT_NEAR(*r.component("bound"), 2.0, 1e-12);
    EXPECT_GE(*r.component("reach"), 1.0 - 1e-9);
}

TEST(ReachBound, UnforcedSmallRadius) {
    const GrowthBound bound{ComparisonFunction::linear(0.0, FunctionClass::K), kId, kId, kId, 0.0};
    ReachOptions opts;
    opts.input_radius = 0.0;
    const auto r = reach_bound_m(linear(), 1e-3, bound, kId, kId, kId, opts);
    EXPECT_FALSE(r.violated());
    EXPECT_LE(*r.component("reach"), 1e-3 * (1 + 1e-6));
}

TEST(ReachBound, ZeroAlphaIsDomainError) {
    const GrowthBound bound{ComparisonFunction::linear(0.0, FunctionClass::K), kId, kId, kId, 0.0};
    EXPECT_THROW((void)reach_bound_m(linear(), 0.0, bound, kId, kId, kId), DomainError);
}

TEST(AuxiliaryGain, Examples) {
    const auto phi = ComparisonFunction::linear(0.25);
    const auto beta0 = kId;
    std::vector<AuxiliaryCase> cases{{{1.0}, InputSignal::constant({1.0})},
                                     {{2.0}, InputSignal::constant({0.0})},
                                     {{0.0}, InputSignal::constant({-1.0})}};
    const auto r = auxiliary_gain_check(linear(), phi, beta0, kId, kId, cases, 10.0);
    EXPECT_FALSE(r.violated());
    EXPECT_GE(r.margin, 0.0);
}

TEST(AuxiliaryGain, PhiConditionFailure) {
    std::vector<AuxiliaryCase> cases{{{1.0}, InputSignal::constant({1.0})}};
    EXPECT_THROW((void)auxiliary_gain_check(linear(), kId, kId, kId, kId, cases, 5.0), SpecError);
}
