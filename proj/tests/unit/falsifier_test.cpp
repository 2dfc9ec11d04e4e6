#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <iiss/errors.hpp>
#include <iiss/estimate_checker.hpp>
#include <iiss/serialization.hpp>

using namespace iiss;

namespace {

ControlSystem linear() { return parse_system("n=1 m=1\ndx1 = -x1 + u1"); }

ControlSystem counterexample() {
    return parse_system("n=2 m=1\ndx1 = -x1*(1 - sin(x2))\ndx2 = -x2 + u1");
}

EstimateSpec iss_spec(const ComparisonFunction& gamma) {
    EstimateSpec s;
    s.form = EstimateForm::ISS;
    s.functions = {{"gamma", gamma}};
    s.beta = KLFunction::exponential();
    return s;
}

EstimateSpec iiss_spec() {
    EstimateSpec s;
    s.form = EstimateForm::IISS;
    s.functions = {{"alpha", ComparisonFunction::identity()}, {"sigma", ComparisonFunction::identity()}};
    s.beta = KLFunction::exponential();
    return s;
}

FalsifyRegion claim_region(const ComparisonFunction& gamma) {
    const double h = std::numbers::pi / 2;
    return {gamma(h) + 2.0, h, 20.0, 8};
}

}  // namespace

TEST(Falsify, FindsCounterexampleViolation) {
    for (const auto& gamma : {ComparisonFunction::identity(), ComparisonFunction::linear(2.0)}) {
        FalsifyOptions opts;
        opts.budget = 2000;
        opts.seed = 1;
        const auto r = falsify(counterexample(), iss_spec(gamma), claim_region(gamma), opts);
        EXPECT_TRUE(r.violated());
        ASSERT_TRUE(r.witness.has_value());
        EXPECT_EQ(r.evaluations, 2000u);
    }
}

TEST(Falsify, LinearIissHoldsOnSamples) {
    FalsifyOptions opts;
    opts.budget = 200;
    const auto r = falsify(linear(), iiss_spec(), {2.0, 2.0, 10.0, 8}, opts);
    EXPECT_FALSE(r.violated());
    EXPECT_GE(r.margin, -r.tolerance);
    EXPECT_EQ(to_string(r.verdict), "holds-on-samples");
}

TEST(Falsify, SingleSampleDeterministic) {
    FalsifyOptions opts;
    opts.budget = 1;
    opts.seed = 99;
    const auto a = io::to_json(falsify(linear(), iiss_spec(), {}, opts));
    const auto b = io::to_json(falsify(linear(), iiss_spec(), {}, opts));
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find("\"evaluations\": 1"), std::string::npos);
}

TEST(Falsify, ReportIndependentOfJobs) {
    const auto gamma = ComparisonFunction::identity();
    FalsifyOptions opts;
    opts.budget = 300;
    opts.seed = 7;
    const auto serial = io::to_json(falsify(counterexample(), iss_spec(gamma), claim_region(gamma), opts));
    for (std::size_t jobs : {2u, 3u, 8u}) {
        opts.jobs = jobs;
        EXPECT_EQ(io::to_json(falsify(counterexample(), iss_spec(gamma), claim_region(gamma), opts)), serial)
            << jobs;
    }
}

TEST(Falsify, SeedsChangeTheSearch) {
    FalsifyOptions a;
    a.budget = 20;
    a.seed = 1;
    FalsifyOptions b = a;
    b.seed = 2;
    const auto ra = falsify(linear(), iiss_spec(), {}, a);
    const auto rb = falsify(linear(), iiss_spec(), {}, b);
    EXPECT_NE(io::to_json(ra), io::to_json(rb));
}

TEST(Falsify, WitnessReplaysAtTighterTolerance) {
    const auto gamma = ComparisonFunction::identity();
    FalsifyOptions opts;
    opts.budget = 400;
    const auto r = falsify(counterexample(), iss_spec(gamma), claim_region(gamma), opts);
    ASSERT_TRUE(r.violated());
    const auto replay = replay_witness(counterexample(), iss_spec(gamma), *r.witness);
    EXPECT_TRUE(replay.violated());
    EXPECT_LE(replay.margin, 0.5 * r.margin);
    EXPECT_DOUBLE_EQ(replay.integrator.absolute, 0.1 * r.integrator.absolute);
}

TEST(Falsify, InvalidArguments) {
    FalsifyOptions opts;
    opts.budget = 0;
    EXPECT_THROW((void)falsify(linear(), iiss_spec(), {}, opts), DomainError);
    EXPECT_THROW((void)falsify(linear(), iiss_spec(), {1.0, 1.0, 0.0, 8}, {}), DomainError);
}

TEST(Falsify, WitnessStaysInRegion) {
    const FalsifyRegion region{0.5, 0.25, 5.0, 4};
    FalsifyOptions opts;
    opts.budget = 100;
    const auto r = falsify(counterexample(), iss_spec(ComparisonFunction::linear(0.01, FunctionClass::K)), region,
                           opts);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_LE(norm(r.witness->xi), 0.5 + 1e-12);
    EXPECT_LE(r.witness->input.sup_norm(), 0.25 + 1e-12);
}
