#include "iiss/system_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

#include "iiss/errors.hpp"
#include "iiss/expression.hpp"

namespace iiss {

ControlSystem::ControlSystem(std::size_t n, std::size_t m, Field field, std::string source)
    : n_(n), m_(m), field_(std::move(field)), source_(std::move(source)) {
    std::vector<double> x(n, 0.0), u(m, 0.0), dx(n, 0.0);
    field_(x, u, dx);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(dx[i]) <= 1e-12)) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "f(0,0) != 0: component %zu evaluates to %.17g", i + 1, dx[i]);
            warnings_.emplace_back(buf);
        }
    }
}

void ControlSystem::evaluate(std::span<const double> x, std::span<const double> u, std::span<double> dx) const {
    field_(x, u, dx);
}

namespace {

struct Statement {
    std::string_view text;
    std::size_t offset;
};

SourceOrigin origin_of(std::string_view source, std::size_t offset) {
    SourceOrigin o;
    for (std::size_t i = 0; i < offset && i < source.size(); ++i) {
        if (source[i] == '\n') {
            ++o.line;
            o.column = 1;
        } else {
            ++o.column;
        }
    }
    return o;
}

std::vector<Statement> split_statements(std::string_view source) {
    std::vector<Statement> out;
    std::size_t start = 0;
    bool comment = false;
    for (std::size_t i = 0; i <= source.size(); ++i) {
        const bool end = i == source.size();
        const char c = end ? '\n' : source[i];
        if (c == '#') {
            if (!comment) {
                out.push_back({source.substr(start, i - start), start});
            }
            comment = true;
            continue;
        }
        if (c == '\n' || (c == ';' && !comment)) {
            if (!comment) {
                out.push_back({source.substr(start, i - start), start});
            }
            comment = false;
            start = i + 1;
        }
    }
    std::erase_if(out, [](const Statement& s) {
        return std::all_of(s.text.begin(), s.text.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    });
    return out;
}

std::size_t skip_space(std::string_view s, std::size_t i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
        ++i;
    }
    return i;
}

std::optional<std::size_t> read_uint(std::string_view s, std::size_t& i) {
    const std::size_t start = i;
    std::size_t v = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        v = v * 10 + static_cast<std::size_t>(s[i] - '0');
        ++i;
    }
    if (i == start) {
        return std::nullopt;
    }
    return v;
}

/// `n=<int> m=<int>`; returns false when the statement is not a header.
bool parse_header(const Statement& st, std::string_view source, std::optional<std::size_t>& n,
                  std::optional<std::size_t>& m) {
    const std::string_view s = st.text;
    std::size_t i = skip_space(s, 0);
    if (i >= s.size() || (s[i] != 'n' && s[i] != 'm')) {
        return false;
    }
    const std::size_t after = skip_space(s, i + 1);
    if (after >= s.size() || s[after] != '=') {
        return false;
    }
    while (true) {
        i = skip_space(s, i);
        if (i >= s.size()) {
            return true;
        }
        const char key = s[i];
        if (key != 'n' && key != 'm') {
            const auto o = origin_of(source, st.offset + i);
            throw ParseError("expected 'n=<int>' or 'm=<int>' in header", o.line, o.column);
        }
        i = skip_space(s, i + 1);
        if (i >= s.size() || s[i] != '=') {
            const auto o = origin_of(source, st.offset + i);
            throw ParseError(std::string("expected '=' after '") + key + "'", o.line, o.column);
        }
        i = skip_space(s, i + 1);
        const std::size_t num_at = i;
        const auto v = read_uint(s, i);
        if (!v) {
            const auto o = origin_of(source, st.offset + num_at);
            throw ParseError(std::string("expected integer for '") + key + "'", o.line, o.column);
        }
        (key == 'n' ? n : m) = *v;
    }
}

}  // namespace

ControlSystem parse_system(std::string_view source) {
    const auto statements = split_statements(source);
    std::optional<std::size_t> n_decl, m_decl;
    struct Equation {
        std::size_t index;
        std::string_view expr;
        std::size_t offset;
        SourceOrigin at;
    };
    std::vector<Equation> equations;
    for (const auto& st : statements) {
        if (equations.empty() && parse_header(st, source, n_decl, m_decl)) {
            continue;
        }
        const std::string_view s = st.text;
        std::size_t i = skip_space(s, 0);
        const auto at = origin_of(source, st.offset + i);
        if (s.substr(i, 2) != "dx") {
            throw ParseError("expected 'dx<i> = <expression>'", at.line, at.column);
        }
        i += 2;
        const auto idx = read_uint(s, i);
        if (!idx || *idx == 0) {
            throw ParseError("expected state index after 'dx'", at.line, at.column);
        }
        i = skip_space(s, i);
        if (i >= s.size() || s[i] != '=') {
            const auto o = origin_of(source, st.offset + i);
            throw ParseError("expected '=' after 'dx" + std::to_string(*idx) + "'", o.line, o.column);
        }
        ++i;
        equations.push_back({*idx, s.substr(i), st.offset + i, at});
    }
    const std::size_t n = n_decl.value_or(equations.size());
    if (equations.size() != n) {
        const auto o = origin_of(source, source.size());
        throw ParseError("dimension mismatch: n=" + std::to_string(n) + " but " + std::to_string(equations.size()) +
                             " equation(s) given",
                         o.line, o.column);
    }
    constexpr std::size_t kImplicitInputs = 16;
    const std::size_t m_vars = m_decl.value_or(kImplicitInputs);
    std::vector<std::string> vars;
    for (std::size_t i = 1; i <= n; ++i) {
        vars.push_back("x" + std::to_string(i));
    }
    for (std::size_t j = 1; j <= m_vars; ++j) {
        vars.push_back("u" + std::to_string(j));
    }
    std::vector<std::optional<Expression>> exprs(n);
    for (const auto& eq : equations) {
        if (eq.index > n) {
            throw ParseError("dx" + std::to_string(eq.index) + " exceeds state dimension " + std::to_string(n),
                             eq.at.line, eq.at.column);
        }
        if (exprs[eq.index - 1]) {
            throw ParseError("duplicate equation for dx" + std::to_string(eq.index), eq.at.line, eq.at.column);
        }
        exprs[eq.index - 1] = Expression::parse(eq.expr, vars, origin_of(source, eq.offset));
    }
    std::size_t m = m_vars;
    if (!m_decl) {
        m = 0;
        for (std::size_t j = 0; j < m_vars; ++j) {
            for (const auto& e : exprs) {
                if (e->uses(n + j)) {
                    m = j + 1;
                }
            }
        }
    }
    std::vector<Expression> compiled;
    for (auto& e : exprs) {
        compiled.push_back(std::move(*e));
    }
    const std::size_t width = n + m_vars;
    auto field = [compiled = std::move(compiled), n, m, width](std::span<const double> x, std::span<const double> u,
                                                                 std::span<double> dx) {
        constexpr std::size_t kInline = 32;
        std::array<double, kInline> small{};
        std::vector<double> large;
        double* buf = small.data();
        if (width > kInline) {
            large.assign(width, 0.0);
            buf = large.data();
        }
        std::copy_n(x.begin(), n, buf);
        std::fill(buf + n, buf + width, 0.0);
        std::copy_n(u.begin(), std::min(m, u.size()), buf + n);
        const std::span<const double> values(buf, width);
        for (std::size_t i = 0; i < n; ++i) {
            dx[i] = compiled[i].evaluate(values);
        }
    };
    return ControlSystem(n, m, std::move(field), std::string(source));
}

std::string_view to_string(TrajectoryStatus s) noexcept {
    switch (s) {
    case TrajectoryStatus::Completed:
        return "completed";
    case TrajectoryStatus::FiniteEscape:
        return "finite-escape";
    case TrajectoryStatus::StepFailure:
        return "step-failure";
    }
    return "unknown";
}

std::span<const double> Trajectory::state(std::size_t j) const {
    return std::span<const double>(states).subspan(j * n, n);
}

std::vector<double> Trajectory::state_at(double t) const {
    if (steps.empty() || t <= steps.front().t0) {
        const auto s = state(0);
        return {s.begin(), s.end()};
    }
    auto it = std::lower_bound(steps.begin(), steps.end(), t,
                               [](const ode::DenseStep& s, double v) { return s.t_end < v; });
    if (it == steps.end()) {
        const auto s = state(size() - 1);
        return {s.begin(), s.end()};
    }
    std::vector<double> out(n);
    it->evaluate(t, out);
    return out;
}

std::vector<double> Trajectory::running_integral(
    const std::function<double(std::span<const double>, std::span<const double>)>& g) const {
    static const double offset = std::sqrt(15.0) / 10.0;
    static constexpr std::array<double, 3> weights{5.0 / 18, 8.0 / 18, 5.0 / 18};
    const std::array<double, 3> nodes{0.5 - offset, 0.5, 0.5 + offset};
    std::vector<double> out(size(), 0.0);
    std::vector<double> x(n);
    double total = 0.0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const auto& s = steps[k];
        const double len = s.t_end - s.t0;
        double acc = 0.0;
        for (std::size_t q = 0; q < 3; ++q) {
            s.evaluate(s.t0 + nodes[q] * len, x);
            acc += weights[q] * g(x, step_inputs[k]);
        }
        total += len * acc;
        out[k + 1] = total;
    }
    return out;
}

Trajectory simulate(const ControlSystem& sys, std::span<const double> xi, const InputSignal& u, double horizon,
                    const SimulationOptions& options) {
    if (!(horizon > 0.0)) {
        throw DomainError("simulation horizon must be positive");
    }
    if (!(options.tolerance.absolute > 0.0) || !(options.tolerance.relative > 0.0)) {
        throw DomainError("integrator tolerances must be positive");
    }
    if (xi.size() != sys.state_dim()) {
        throw DomainError("initial state has dimension " + std::to_string(xi.size()) + ", expected " +
                          std::to_string(sys.state_dim()));
    }
    if (u.dim() != sys.input_dim() && !(sys.input_dim() == 0 && u.dim() == 0)) {
        throw DomainError("input has dimension " + std::to_string(u.dim()) + ", expected " +
                          std::to_string(sys.input_dim()));
    }
    Trajectory traj;
    traj.n = sys.state_dim();
    traj.m = sys.input_dim();
    traj.times.push_back(0.0);
    traj.states.assign(xi.begin(), xi.end());
    std::vector<double> y(xi.begin(), xi.end());
    const ode::Options opts{options.tolerance, options.blowup_threshold, options.max_steps};
    const auto& bps = u.breakpoints();
    for (std::size_t seg = 0; seg < bps.size() && bps[seg] < horizon; ++seg) {
        const double a = bps[seg];
        const double b = seg + 1 < bps.size() ? std::min(bps[seg + 1], horizon) : horizon;
        const auto value = u.segment_value(seg);
        const std::vector<double> held(value.begin(), value.end());
        const ode::Rhs rhs = [&sys, &held](std::span<const double> x, std::span<double> dx) {
            sys.evaluate(x, held, dx);
            return true;
        };
        const std::size_t before = traj.steps.size();
        const auto result = ode::integrate(rhs, a, b, y, opts, traj.steps, traj.stats);
        for (std::size_t k = before; k < traj.steps.size(); ++k) {
            traj.step_inputs.push_back(held);
            const auto& s = traj.steps[k];
            traj.times.push_back(s.t_end);
            if (k + 1 == traj.steps.size()) {
                traj.states.insert(traj.states.end(), y.begin(), y.end());
            } else {
                std::vector<double> end(traj.n);
                s.evaluate(s.t_end, end);
                traj.states.insert(traj.states.end(), end.begin(), end.end());
            }
        }
        if (result.stop == ode::Stop::Escape) {
            traj.status = TrajectoryStatus::FiniteEscape;
            traj.message = result.message;
            traj.blowup = BlowupReport{result.t, y, norm(y)};
            return traj;
        }
        if (result.stop == ode::Stop::StepFailure) {
            traj.status = TrajectoryStatus::StepFailure;
            traj.message = result.message;
            return traj;
        }
    }
    return traj;
}

ClosedLoop close_loop(const ControlSystem& sys, const ComparisonFunction& phi, const InputSignal& d) {
    if (d.dim() != sys.input_dim()) {
        throw DomainError("disturbance dimension does not match the system input dimension");
    }
    if (d.sup_norm() > 1.0) {
        throw DomainError("disturbance must take values in the closed unit ball");
    }
    const std::size_t m = sys.input_dim();
    auto field = [sys, phi, m](std::span<const double> x, std::span<const double> dv, std::span<double> dx) {
        const double gain = phi(norm(x));
        std::vector<double> u(m);
        for (std::size_t j = 0; j < m; ++j) {
            u[j] = dv[j] * gain;
        }
        sys.evaluate(x, u, dx);
    };
    return {ControlSystem(sys.state_dim(), m, std::move(field), sys.source()), d};
}

std::string trajectory_csv(const Trajectory& traj, const InputSignal& u, const std::vector<std::string>& comments) {
    std::string out;
    for (const auto& c : comments) {
        out += "# " + c + "\n";
    }
    out += "t";
    for (std::size_t i = 1; i <= traj.n; ++i) {
        out += ",x" + std::to_string(i);
    }
    for (std::size_t j = 1; j <= u.dim(); ++j) {
        out += ",u" + std::to_string(j);
    }
    out += "\n";
    char buf[32];
    const auto put = [&](double v) { out.append(buf, std::to_chars(buf, buf + sizeof buf, v).ptr); };
    for (std::size_t k = 0; k < traj.size(); ++k) {
        put(traj.times[k]);
        for (double v : traj.state(k)) {
            out += ',';
            put(v);
        }
        for (double v : u.value_at(traj.times[k])) {
            out += ',';
            put(v);
        }
        out += "\n";
    }
    return out;
}

}  // namespace iiss
