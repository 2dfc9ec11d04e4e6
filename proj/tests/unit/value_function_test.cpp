#include <gtest/gtest.h>

#include <cmath>

#include <iiss/errors.hpp>
#include <iiss/estimate_checker.hpp>

using namespace iiss;

namespace {

const ComparisonFunction kId = ComparisonFunction::identity();

ControlSystem linear() { return parse_system("n=1 m=1\ndx1 = -x1 + u1"); }

}  // namespace

TEST(ValueFunction, InputFreeDecay) {
    const auto sys = parse_system("n=1 m=0\ndx1 = -x1");
    const std::vector<double> xi{1.0};
    const auto v = estimate_value_function(sys, kId, kId, xi, 50, 0);
    EXPECT_DOUBLE_EQ(v.value, 1.0);
    EXPECT_EQ(v.time, 0.0);
    EXPECT_EQ(v.evaluated, 1u);
}

TEST(ValueFunction, ExpensiveInputs) {
    const std::vector<double> xi{1.0};
    const auto v = estimate_value_function(linear(), kId, ComparisonFunction::linear(1e6), xi, 500, 3);
    EXPECT_DOUBLE_EQ(v.value, 1.0);
}

TEST(ValueFunction, Origin) {
    const std::vector<double> xi{0.0};
    ValueSearchOptions opts;
    opts.input_radius = 0.0;
    const auto v = estimate_value_function(linear(), kId, kId, xi, 10, 0, opts);
    EXPECT_DOUBLE_EQ(v.value, 0.0);
}

TEST(ValueFunction, DominatesAlphaAtStart) {
    for (double x : {0.0, 0.3, 1.0, 4.0}) {
        const std::vector<double> xi{x};
        EXPECT_GE(estimate_value_function(linear(), kId, kId, xi, 20, 5).value, x);
    }
}

TEST(ValueFunction, MonotoneInBudget) {
    const std::vector<double> xi{0.5};
    // Cheap inputs so the search can push the state outward.
    const auto sigma = ComparisonFunction::linear(0.05);
    double prev = -1.0;
    for (std::size_t budget : {1u, 2u, 4u, 8u, 16u, 64u, 256u}) {
        const double v = estimate_value_function(linear(), kId, sigma, xi, budget, 13).value;
        EXPECT_GE(v, prev) << budget;
        prev = v;
    }
    EXPECT_GT(prev, 0.5);
}

TEST(ValueFunction, ZeroBudgetThrows) {
    const std::vector<double> xi{1.0};
    EXPECT_THROW((void)estimate_value_function(linear(), kId, kId, xi, 0, 0), DomainError);
}

TEST(ValueFunction, SearchFamilyIsSeeded) {
    ValueSearchOptions opts;
    EXPECT_EQ(value_search_input(0, 1, 4, opts), InputSignal::zero(1));
    EXPECT_EQ(value_search_input(3, 1, 4, opts), value_search_input(3, 1, 4, opts));
    EXPECT_NE(value_search_input(3, 1, 4, opts), value_search_input(3, 1, 5, opts));
    EXPECT_LE(value_search_input(7, 2, 4, opts).sup_norm(), opts.input_radius + 1e-12);
}

TEST(ValueDissipation, TimeZeroReducesToInclusion) {
    const std::vector<double> xi{0.7};
    const auto r = check_value_dissipation(linear(), kId, kId, xi, 0.0, InputSignal::constant({0.3}), 30, 1);
    EXPECT_FALSE(r.violated());
    EXPECT_GE(r.margin, 0.0);
}

TEST(ValueDissipation, LinearUnforced) {
    const std::vector<double> xi{1.0};
    const auto r = check_value_dissipation(linear(), kId, kId, xi, 1.0, InputSignal::zero(1), 100, 2);
    EXPECT_FALSE(r.violated());
    EXPECT_LE(*r.component("value_at_state"), *r.component("value_closure_at_start") + 1e-9);
}

TEST(ValueDissipation, CounterexampleSystem) {
    const auto sys = parse_system("n=2 m=1\ndx1 = -x1*(1 - sin(x2))\ndx2 = -x2 + u1");
    const std::vector<double> xi{1.0, 0.0};
    const auto r = check_value_dissipation(sys, kId, kId, xi, 2.0, InputSignal::constant({0.4}), 500, 3);
    EXPECT_FALSE(r.violated()) << r.margin;
}

TEST(ValueDissipation, NegativeTimeIsDomainError) {
    const std::vector<double> xi{1.0};
    EXPECT_THROW((void)check_value_dissipation(linear(), kId, kId, xi, -1.0, InputSignal::zero(1), 5, 0),
                 DomainError);
}
