#include "iiss/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iiss/input_signal.hpp"

namespace iiss::ode {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

bool finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

class Stepper {
public:
    Stepper(const Rhs& f, std::size_t n, Stats& stats)
        : f_(f), n_(n), stats_(stats), k_(7, std::vector<double>(n)), tmp_(n), y1_(n) {}

    bool eval(std::span<const double> y, std::vector<double>& dy) {
        ++stats_.evaluations;
        return f_(y, dy) && finite(dy);
    }

    bool stage(const std::vector<double>& y, double h, std::initializer_list<std::pair<int, double>> terms,
               std::vector<double>& out) {
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (const auto& [j, a] : terms) {
                s += a * k_[j][i];
            }
            tmp_[i] = y[i] + h * s;
        }
        return finite(tmp_) && eval(tmp_, out);
    }

    /// Trial step from (y, k1 = k_[0]); fills y1_, k_[6], and err_norm.
    bool trial(const std::vector<double>& y, double h, const Tolerance& tol, double& err_norm) {
        if (!stage(y, h, {{0, a21}}, k_[1]) || !stage(y, h, {{0, a31}, {1, a32}}, k_[2]) ||
            !stage(y, h, {{0, a41}, {1, a42}, {2, a43}}, k_[3]) ||
            !stage(y, h, {{0, a51}, {1, a52}, {2, a53}, {3, a54}}, k_[4]) ||
            !stage(y, h, {{0, a61}, {1, a62}, {2, a63}, {3, a64}, {4, a65}}, k_[5])) {
            return false;
        }
        for (std::size_t i = 0; i < n_; ++i) {
            y1_[i] = y[i] + h * (a71 * k_[0][i] + a73 * k_[2][i] + a74 * k_[3][i] + a75 * k_[4][i] +
                                 a76 * k_[5][i]);
        }
        if (!finite(y1_) || !eval(y1_, k_[6])) {
            return false;
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double e = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                                  e6 * k_[5][i] + e7 * k_[6][i]);
            const double sc = tol.absolute + tol.relative * std::max(std::abs(y[i]), std::abs(y1_[i]));
            sum += (e / sc) * (e / sc);
        }
        err_norm = n_ == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n_));
        return std::isfinite(err_norm);
    }

    DenseStep dense(const std::vector<double>& y, double t0, double h) const {
        DenseStep s{t0, h, t0 + h, std::vector<double>(5 * n_)};
        for (std::size_t i = 0; i < n_; ++i) {
            const double diff = y1_[i] - y[i];
            const double bspl = h * k_[0][i] - diff;
            s.coeffs[i] = y[i];
            s.coeffs[n_ + i] = diff;
            s.coeffs[2 * n_ + i] = bspl;
            s.coeffs[3 * n_ + i] = diff - h * k_[6][i] - bspl;
            s.coeffs[4 * n_ + i] = h * (d1 * k_[0][i] + d3 * k_[2][i] + d4 * k_[3][i] + d5 * k_[4][i] +
                                        d6 * k_[5][i] + d7 * k_[6][i]);
        }
        return s;
    }

    double initial_step(const std::vector<double>& y, double span, const Tolerance& tol) {
        double d0 = 0.0, d1n = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sc = tol.absolute + tol.relative * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1n += (k_[0][i] / sc) * (k_[0][i] / sc);
        }
        const double dn = static_cast<double>(std::max<std::size_t>(n_, 1));
        d0 = std::sqrt(d0 / dn);
        d1n = std::sqrt(d1n / dn);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, span);
        for (std::size_t i = 0; i < n_; ++i) {
            tmp_[i] = y[i] + h0 * k_[0][i];
        }
        std::vector<double> f1(n_);
        if (!finite(tmp_) || !eval(tmp_, f1)) {
            return h0;
        }
        double d2 = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sc = tol.absolute + tol.relative * std::abs(y[i]);
            d2 += ((f1[i] - k_[0][i]) / sc) * ((f1[i] - k_[0][i]) / sc);
        }
        d2 = std::sqrt(d2 / dn) / h0;
        const double dm = std::max(d1n, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        return std::min({100.0 * h0, h1, span});
    }

    const Rhs& f_;
    std::size_t n_;
    Stats& stats_;
    std::vector<std::vector<double>> k_;
    std::vector<double> tmp_;
    std::vector<double> y1_;
};

}  // namespace

void DenseStep::evaluate(double t, std::span<double> out) const {
    const std::size_t n = dim();
    const double theta = h == 0.0 ? 0.0 : std::clamp((t - t0) / h, 0.0, 1.0);
    const double theta1 = 1.0 - theta;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = coeffs[i] +
                 theta * (coeffs[n + i] +
                          theta1 * (coeffs[2 * n + i] + theta * (coeffs[3 * n + i] + theta1 * coeffs[4 * n + i])));
    }
}

SegmentResult integrate(const Rhs& f, double t0, double t1, std::vector<double>& y, const Options& options,
                        std::vector<DenseStep>& steps, Stats& stats) {
    const std::size_t n = y.size();
    if (t1 <= t0) {
        return {Stop::Reached, t0, {}};
    }
    Stepper st(f, n, stats);
    if (!st.eval(y, st.k_[0])) {
        return {Stop::StepFailure, t0, "vector field not finite at t = " + std::to_string(t0)};
    }
    const Tolerance& tol = options.tolerance;
    double t = t0;
    double h = st.initial_step(y, t1 - t0, tol);
    std::size_t taken = 0;
    while (t < t1) {
        if (taken++ >= options.max_steps) {
            return {Stop::StepFailure, t, "step limit reached at t = " + std::to_string(t)};
        }
        const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        bool last = false;
        if (t + h >= t1 || t + 1.01 * h >= t1) {
            h = t1 - t;
            last = true;
        }
        if (h < h_min && !last) {
            return {Stop::StepFailure, t, "step size underflow at t = " + std::to_string(t)};
        }
        double err = 0.0;
        if (!st.trial(y, h, tol, err)) {
            ++stats.rejected;
            h *= 0.2;
            if (h < h_min) {
                return {Stop::StepFailure, t, "vector field not finite near t = " + std::to_string(t)};
            }
            continue;
        }
        if (err > 1.0) {
            ++stats.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }
        ++stats.accepted;
        DenseStep step = st.dense(y, t, h);
        if (last) {
            step.t_end = t1;
        }
        if (norm(st.y1_) > options.blowup_threshold) {
            std::vector<double> probe(n);
            double lo = t, hi = step.t_end;
            for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) {
                    break;
                }
                step.evaluate(mid, probe);
                (norm(probe) > options.blowup_threshold ? hi : lo) = mid;
            }
            step.t_end = hi;
            step.evaluate(hi, probe);
            y = probe;
            steps.push_back(std::move(step));
            return {Stop::Escape, hi, "state norm exceeded " + std::to_string(options.blowup_threshold)};
        }
        steps.push_back(std::move(step));
        y = st.y1_;
        std::swap(st.k_[0], st.k_[6]);
        t = last ? t1 : t + h;
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h *= fac;
    }
    return {Stop::Reached, t1, {}};
}

}  // namespace iiss::ode
