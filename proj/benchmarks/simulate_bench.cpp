#include <benchmark/benchmark.h>

#include <numbers>

#include <iiss/counterexample.hpp>
#include <iiss/system_model.hpp>

namespace {

void BM_SimulateLinear(benchmark::State& state) {
    const auto sys = iiss::parse_system("n=1 m=1\ndx1 = -x1 + u1");
    const std::vector<double> xi{1.0};
    std::vector<std::vector<double>> values(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = {i % 2 == 0 ? 1.0 : -1.0};
    }
    const auto u = iiss::InputSignal::uniform_segments(10.0, std::move(values));
    for (auto _ : state) {
        auto traj = iiss::simulate(sys, xi, u, 10.0);
        benchmark::DoNotOptimize(traj.states.data());
    }
    state.counters["segments"] = static_cast<double>(state.range(0));
}
BENCHMARK(BM_SimulateLinear)->RangeMultiplier(4)->Range(1, 256);

void BM_SimulateCounterexample(benchmark::State& state) {
    const auto sys = iiss::counterexample::system();
    const std::vector<double> xi{3.0, -1.0};
    const auto u = iiss::InputSignal::constant({0.4});
    const double horizon = static_cast<double>(state.range(0));
    std::size_t steps = 0;
    for (auto _ : state) {
        auto traj = iiss::simulate(sys, xi, u, horizon);
        steps = traj.steps.size();
        benchmark::DoNotOptimize(traj.states.data());
    }
    state.counters["steps"] = static_cast<double>(steps);
}
BENCHMARK(BM_SimulateCounterexample)->Arg(10)->Arg(50)->Arg(200);

void BM_ParseSystem(benchmark::State& state) {
    for (auto _ : state) {
        auto sys = iiss::parse_system("n=2 m=1\ndx1 = -x1*(1 - sin(x2))\ndx2 = -x2 + u1");
        benchmark::DoNotOptimize(&sys);
    }
}
BENCHMARK(BM_ParseSystem);

}  // namespace
