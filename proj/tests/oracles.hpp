#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <iiss/input_signal.hpp>

namespace oracle {

using Field = std::function<void(const std::vector<double>& x, const std::vector<double>& u, std::vector<double>& dx)>;

/// Classical RK4 with a fixed step, restarted at every input breakpoint.
inline std::vector<double> rk4(const Field& f, std::vector<double> x, const iiss::InputSignal& u, double T,
                               double h = 1e-3) {
    std::vector<double> cuts;
    for (double b : u.breakpoints()) {
        if (b > 0.0 && b < T) {
            cuts.push_back(b);
        }
    }
    cuts.push_back(T);
    const std::size_t n = x.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    double t = 0.0;
    for (double end : cuts) {
        const auto uv = u.dim() > 0 ? u.value_at(t) : std::span<const double>();
        const std::vector<double> v(uv.begin(), uv.end());
        const int steps = std::max(1, static_cast<int>(std::ceil((end - t) / h)));
        const double dt = (end - t) / steps;
        for (int s = 0; s < steps; ++s) {
            f(x, v, k1);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
            f(tmp, v, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
            f(tmp, v, k3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
            f(tmp, v, k4);
            for (std::size_t i = 0; i < n; ++i) x[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        }
        t = end;
    }
    return x;
}

/// x' = -x + u for scalar piecewise-constant u, exact.
inline double linear_decay(double xi, const iiss::InputSignal& u, double t) {
    double x = xi;
    double s = 0.0;
    const auto& b = u.breakpoints();
    for (std::size_t i = 0; i < u.segments() && s < t; ++i) {
        const double end = i + 1 < u.segments() ? std::min(b[i + 1], t) : t;
        const double v = u.segment_value(i)[0];
        x = v + (x - v) * std::exp(-(end - s));
        s = end;
    }
    return x;
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

/// k equal segments over [0, T] with scalar values in [-bound, bound].
inline iiss::InputSignal random_scalar_input(std::mt19937_64& g, double T, std::size_t k, double bound) {
    std::vector<std::vector<double>> values(k);
    for (auto& v : values) {
        v = {uniform(g, -bound, bound)};
    }
    return iiss::InputSignal::uniform_segments(T, std::move(values));
}

}  // namespace oracle
