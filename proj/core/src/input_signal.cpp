#include "iiss/input_signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "iiss/errors.hpp"

namespace iiss {

double norm(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

InputSignal::InputSignal() : breakpoints_{0.0} {}

InputSignal::InputSignal(std::vector<double> breakpoints, std::vector<std::vector<double>> values) {
    if (breakpoints.empty() || breakpoints.size() != values.size()) {
        throw DomainError("input signal needs one value per breakpoint");
    }
    if (breakpoints.front() != 0.0) {
        throw DomainError("input signal must start at t = 0");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > breakpoints[i - 1]) || !std::isfinite(breakpoints[i])) {
            throw DomainError("input breakpoints must be finite and strictly increasing");
        }
    }
    dim_ = values.front().size();
    for (const auto& v : values) {
        if (v.size() != dim_) {
            throw DomainError("input values must all have the same dimension");
        }
        for (double x : v) {
            if (!std::isfinite(x)) {
                throw DomainError("input values must be finite");
            }
        }
        values_.insert(values_.end(), v.begin(), v.end());
    }
    breakpoints_ = std::move(breakpoints);
}

InputSignal InputSignal::constant(std::vector<double> value) { return InputSignal({0.0}, {std::move(value)}); }

InputSignal InputSignal::zero(std::size_t dim) { return constant(std::vector<double>(dim, 0.0)); }

InputSignal InputSignal::uniform_segments(double horizon, std::vector<std::vector<double>> values) {
    if (values.empty() || !(horizon > 0.0)) {
        throw DomainError("uniform_segments needs a positive horizon and at least one value");
    }
    std::vector<double> bps(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        bps[i] = horizon * static_cast<double>(i) / static_cast<double>(values.size());
    }
    return InputSignal(std::move(bps), std::move(values));
}

InputSignal InputSignal::parse(std::string_view text) {
    std::vector<double> bps;
    std::vector<std::vector<double>> values;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        for (char& c : line) {
            if (c == ',') {
                c = ' ';
            }
        }
        std::istringstream row(line);
        std::vector<double> nums;
        std::string tok;
        while (row >> tok) {
            try {
                std::size_t used = 0;
                nums.push_back(std::stod(tok, &used));
                if (used != tok.size()) {
                    throw std::invalid_argument(tok);
                }
            } catch (const std::exception&) {
                throw ParseError("malformed number '" + tok + "'", line_no, 1);
            }
        }
        if (nums.empty()) {
            continue;
        }
        if (!values.empty() && nums.size() - 1 != values.front().size()) {
            throw ParseError("row has " + std::to_string(nums.size() - 1) + " values, expected " +
                                 std::to_string(values.front().size()),
                             line_no, 1);
        }
        bps.push_back(nums.front());
        values.emplace_back(nums.begin() + 1, nums.end());
    }
    if (bps.empty()) {
        throw ParseError("input file has no rows", line_no, 1);
    }
    try {
        return InputSignal(std::move(bps), std::move(values));
    } catch (const DomainError& e) {
        throw ParseError(e.what(), 1, 1);
    }
}

std::string InputSignal::to_text() const {
    std::string out;
    char buf[32];
    const auto put = [&](double v) { out.append(buf, std::to_chars(buf, buf + sizeof buf, v).ptr); };
    for (std::size_t i = 0; i < segments(); ++i) {
        put(breakpoints_[i]);
        for (double v : segment_value(i)) {
            out += ' ';
            put(v);
        }
        out += '\n';
    }
    return out;
}

std::span<const double> InputSignal::segment_value(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * dim_, dim_);
}

std::size_t InputSignal::segment_index(double t) const {
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

std::span<const double> InputSignal::value_at(double t) const { return segment_value(segment_index(t)); }

double InputSignal::sup_norm() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < segments(); ++i) {
        s = std::max(s, norm(segment_value(i)));
    }
    return s;
}

double InputSignal::sup_norm(double t) const {
    if (!(t >= 0.0)) {
        throw DomainError("sup_norm needs t >= 0");
    }
    double s = norm(segment_value(0));
    for (std::size_t i = 1; i < segments() && breakpoints_[i] < t; ++i) {
        s = std::max(s, norm(segment_value(i)));
    }
    return s;
}

double InputSignal::integral(const ComparisonFunction& sigma, double t) const {
    return integral_of([&sigma](double r) { return sigma(r); }, t);
}

double InputSignal::integral_of(const std::function<double(double)>& g, double t) const {
    if (!(t >= 0.0)) {
        throw DomainError("integral needs t >= 0");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < segments() && breakpoints_[i] < t; ++i) {
        const double end = i + 1 < segments() ? std::min(breakpoints_[i + 1], t) : t;
        total += g(norm(segment_value(i))) * (end - breakpoints_[i]);
    }
    return total;
}

InputSignal InputSignal::shifted(double tau) const {
    if (!(tau >= 0.0)) {
        throw DomainError("shift must be nonnegative");
    }
    if (tau == 0.0) {
        return *this;
    }
    const std::size_t first = segment_index(tau);
    std::vector<double> bps{0.0};
    std::vector<std::vector<double>> vals;
    const auto v0 = segment_value(first);
    vals.emplace_back(v0.begin(), v0.end());
    for (std::size_t i = first + 1; i < segments(); ++i) {
        bps.push_back(breakpoints_[i] - tau);
        const auto v = segment_value(i);
        vals.emplace_back(v.begin(), v.end());
    }
    return InputSignal(std::move(bps), std::move(vals));
}

InputSignal saturate(const InputSignal& u, double radius) {
    if (!(radius > 0.0)) {
        throw DomainError("saturation radius must be positive");
    }
    std::vector<std::vector<double>> vals;
    for (std::size_t i = 0; i < u.segments(); ++i) {
        const auto v = u.segment_value(i);
        std::vector<double> w(v.begin(), v.end());
        const double n = norm(v);
        if (n > radius) {
            const double scale = radius / n;
            for (double& x : w) {
                x *= scale;
            }
            // Rounding may leave |w| a few ulps above the radius.
            while (norm(w) > radius) {
                for (double& x : w) {
                    x = std::nextafter(x, 0.0);
                }
            }
        }
        vals.push_back(std::move(w));
    }
    return InputSignal(u.breakpoints(), std::move(vals));
}

InputSignal concat(const InputSignal& u, const InputSignal& v, double tau) {
    if (!(tau >= 0.0)) {
        throw DomainError("concatenation time must be nonnegative");
    }
    if (u.dim() != v.dim()) {
        throw DomainError("cannot concatenate inputs of different dimension");
    }
    if (tau == 0.0) {
        return v;
    }
    std::vector<double> bps;
    std::vector<std::vector<double>> vals;
    for (std::size_t i = 0; i < u.segments() && u.breakpoints()[i] < tau; ++i) {
        bps.push_back(u.breakpoints()[i]);
        const auto w = u.segment_value(i);
        vals.emplace_back(w.begin(), w.end());
    }
    for (std::size_t i = 0; i < v.segments(); ++i) {
        bps.push_back(tau + v.breakpoints()[i]);
        const auto w = v.segment_value(i);
        vals.emplace_back(w.begin(), w.end());
    }
    return InputSignal(std::move(bps), std::move(vals));
}

}  // namespace iiss
