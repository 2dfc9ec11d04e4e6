#include "iiss/comparison_functions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace iiss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Strict comparisons report a tiny negative slack on equality so that
// `pass <=> worst_slack >= 0` covers strict conditions as well.
double strict_slack(double diff) {
    if (std::isnan(diff)) {
        return -kInf;
    }
    return diff > 0.0 ? diff : diff - std::numeric_limits<double>::denorm_min();
}

double plain_slack(double diff) { return std::isnan(diff) ? -kInf : diff; }

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Collects class-invariant conditions with zero tolerance.
class ClassCheck {
public:
    explicit ClassCheck(std::string description) { cert_.description = std::move(description); }

    void condition(double slack, const char* what, std::vector<double> point) {
        ++cert_.points;
        if (cert_.points == 1 || slack < cert_.worst_slack) {
            cert_.worst_slack = slack;
            cert_.worst_point = std::move(point);
            if (slack < 0.0) {
                failure_ = what;
            }
        }
    }

    InequalityCertificate finish(const Grid& grid) {
        cert_.tolerance = 0.0;
        cert_.pass = cert_.worst_slack >= 0.0;
        if (!grid.empty()) {
            cert_.grid_min = grid.front();
            cert_.grid_max = grid.back();
        }
        if (!cert_.pass) {
            cert_.description += ": " + failure_;
        }
        return cert_;
    }

private:
    InequalityCertificate cert_;
    std::string failure_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Grids

Grid linear_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !(hi > lo) || lo < 0.0) {
        throw DomainError("linear_grid needs 0 <= lo < hi and at least two points");
    }
    Grid g(points);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    g.back() = hi;
    return g;
}

Grid log_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !(hi > lo) || lo <= 0.0) {
        throw DomainError("log_grid needs 0 < lo < hi and at least two points");
    }
    Grid g(points);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

Grid default_grid() { return log_grid(1e-6, 1e6, 64); }

Grid merge_grids(std::initializer_list<const Grid*> grids) {
    Grid out;
    for (const Grid* g : grids) {
        out.insert(out.end(), g->begin(), g->end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Grid integer_grid(int first, int last) {
    Grid g;
    for (int i = first; i <= last; ++i) {
        g.push_back(static_cast<double>(i));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Certificates

CertificateBuilder::CertificateBuilder(std::string description, CertificateTolerance tol)
    : description_(std::move(description)), tol_(tol) {}

void CertificateBuilder::add(double lhs, double rhs, std::initializer_list<double> point) {
    add(lhs, rhs, std::vector<double>(point));
}

void CertificateBuilder::add(double lhs, double rhs, const std::vector<double>& point) {
    double slack = rhs - lhs;
    if (!std::isfinite(lhs) || std::isnan(rhs) || std::isnan(slack)) {
        nonfinite_ = true;
        slack = -kInf;
    } else if (std::isfinite(lhs)) {
        lhs_scale_ = std::max(lhs_scale_, std::abs(lhs));
    }
    for (double p : point) {
        if (!has_extent_) {
            grid_min_ = grid_max_ = p;
            has_extent_ = true;
        }
        grid_min_ = std::min(grid_min_, p);
        grid_max_ = std::max(grid_max_, p);
    }
    if (count_ == 0 || slack < worst_) {
        worst_ = slack;
        worst_point_ = point;
    }
    ++count_;
}

InequalityCertificate CertificateBuilder::finish() const {
    InequalityCertificate c;
    c.points = count_;
    c.grid_min = grid_min_;
    c.grid_max = grid_max_;
    c.worst_slack = count_ == 0 ? 0.0 : worst_;
    c.tolerance = tol_.absolute + tol_.relative * lhs_scale_;
    c.pass = !nonfinite_ && c.worst_slack >= -c.tolerance;
    c.worst_point = worst_point_;
    c.description = description_;
    return c;
}

// ---------------------------------------------------------------------------
// FunctionClass

std::string_view to_string(FunctionClass c) noexcept {
    switch (c) {
    case FunctionClass::K:
        return "K";
    case FunctionClass::KInfinity:
        return "Kinf";
    case FunctionClass::L:
        return "L";
    case FunctionClass::PositiveDefinite:
        return "posdef";
    }
    return "?";
}

FunctionClass function_class_from_string(std::string_view s) {
    if (s == "K") return FunctionClass::K;
    if (s == "Kinf" || s == "K_inf" || s == "Kinfinity") return FunctionClass::KInfinity;
    if (s == "L") return FunctionClass::L;
    if (s == "posdef" || s == "positive-definite" || s == "PD") return FunctionClass::PositiveDefinite;
    throw SpecError("unknown function class '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// ComparisonFunction

ComparisonFunction ComparisonFunction::linear(double a, FunctionClass cls) {
    ComparisonFunction f;
    f.kind_ = Kind::Linear;
    f.class_ = cls;
    f.a_ = a;
    return f;
}

ComparisonFunction ComparisonFunction::power(double a, double b, FunctionClass cls) {
    if (!(b > 0.0)) {
        throw DomainError("power exponent must be positive");
    }
    ComparisonFunction f;
    f.kind_ = Kind::Power;
    f.class_ = cls;
    f.a_ = a;
    f.b_ = b;
    return f;
}

ComparisonFunction ComparisonFunction::exp_minus_one(double a, double b, FunctionClass cls) {
    ComparisonFunction f;
    f.kind_ = Kind::ExpMinusOne;
    f.class_ = cls;
    f.a_ = a;
    f.b_ = b;
    return f;
}

ComparisonFunction ComparisonFunction::saturating(double a, FunctionClass cls) {
    ComparisonFunction f;
    f.kind_ = Kind::Saturating;
    f.class_ = cls;
    f.a_ = a;
    return f;
}

ComparisonFunction ComparisonFunction::table(std::vector<double> x, std::vector<double> y, double tail_exponent,
                                             FunctionClass cls) {
    if (x.empty() || x.size() != y.size()) {
        throw DomainError("table needs matching, nonempty node and value arrays");
    }
    if (x.front() < 0.0) {
        throw DomainError("table nodes must be nonnegative");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) {
            throw DomainError("table nodes must be strictly increasing");
        }
    }
    if (!std::isfinite(tail_exponent)) {
        throw DomainError("table tail exponent must be finite");
    }
    ComparisonFunction f;
    f.kind_ = Kind::Table;
    f.class_ = cls;
    f.tail_ = tail_exponent;
    f.table_ = std::make_shared<const TableData>(TableData{std::move(x), std::move(y)});
    return f;
}

ComparisonFunction ComparisonFunction::expression(std::string_view text, FunctionClass cls) {
    ComparisonFunction f;
    f.kind_ = Kind::Expr;
    f.class_ = cls;
    f.expr_ = std::make_shared<const Expression>(Expression::parse(text, {"r"}));
    return f;
}

double ComparisonFunction::table_value(double r) const {
    const auto& x = table_->x;
    const auto& y = table_->y;
    if (r <= x.front()) {
        if (r == x.front() || x.front() == 0.0) {
            return y.front();
        }
        if (class_ == FunctionClass::L) {
            return y.front();
        }
        return y.front() * (r / x.front());
    }
    if (r >= x.back()) {
        if (r == x.back()) {
            return y.back();
        }
        return y.back() * std::pow(r / x.back(), tail_);
    }
    const auto it = std::upper_bound(x.begin(), x.end(), r);
    const std::size_t hi = static_cast<std::size_t>(it - x.begin());
    const std::size_t lo = hi - 1;
    const double w = (r - x[lo]) / (x[hi] - x[lo]);
    return y[lo] + w * (y[hi] - y[lo]);
}

double ComparisonFunction::operator()(double r) const {
    if (!(r >= 0.0)) {
        throw DomainError("comparison function evaluated at negative or NaN argument");
    }
    switch (kind_) {
    case Kind::Linear:
        return a_ * r;
    case Kind::Power:
        return r == 0.0 ? 0.0 : a_ * std::pow(r, b_);
    case Kind::ExpMinusOne:
        return a_ * std::expm1(b_ * r);
    case Kind::Saturating:
        return std::isinf(r) ? a_ : a_ * r / (1.0 + r);
    case Kind::Table:
        return table_value(r);
    case Kind::Expr: {
        const double arg[1] = {r};
        return expr_->evaluate(arg);
    }
    }
    return 0.0;
}

const std::vector<double>& ComparisonFunction::table_x() const {
    if (!table_) {
        throw ClassError("not a table function");
    }
    return table_->x;
}

const std::vector<double>& ComparisonFunction::table_y() const {
    if (!table_) {
        throw ClassError("not a table function");
    }
    return table_->y;
}

const std::string& ComparisonFunction::expression_text() const {
    if (!expr_) {
        throw ClassError("not an expression function");
    }
    return expr_->source();
}

ComparisonFunction ComparisonFunction::scaled(double c) const {
    ComparisonFunction f = *this;
    switch (kind_) {
    case Kind::Table: {
        std::vector<double> y = table_->y;
        for (double& v : y) {
            v *= c;
        }
        f.table_ = std::make_shared<const TableData>(TableData{table_->x, std::move(y)});
        return f;
    }
    case Kind::Expr:
        return expression(format_number(c) + "*(" + expr_->source() + ")", class_);
    default:
        f.a_ = a_ * c;
        return f;
    }
}

ComparisonFunction ComparisonFunction::with_class(FunctionClass cls) const {
    ComparisonFunction f = *this;
    f.class_ = cls;
    return f;
}

std::optional<bool> ComparisonFunction::unbounded_by_construction() const {
    switch (kind_) {
    case Kind::Linear:
        return a_ > 0.0;
    case Kind::Power:
    case Kind::ExpMinusOne:
        return a_ > 0.0 && b_ > 0.0;
    case Kind::Saturating:
        return false;
    case Kind::Table:
        return tail_ > 0.0 && table_->y.back() > 0.0;
    case Kind::Expr:
        return std::nullopt;
    }
    return std::nullopt;
}

ComparisonFunction tabulate(const std::function<double(double)>& f, const Grid& nodes, FunctionClass cls,
                            std::optional<double> tail_exponent) {
    std::vector<double> y(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        y[i] = f(nodes[i]);
    }
    double tail = 0.0;
    if (tail_exponent) {
        tail = *tail_exponent;
    } else if (nodes.size() >= 2) {
        const std::size_t n = nodes.size();
        if (y[n - 1] > 0.0 && y[n - 2] > 0.0 && nodes[n - 2] > 0.0) {
            tail = std::log(y[n - 1] / y[n - 2]) / std::log(nodes[n - 1] / nodes[n - 2]);
        }
        if (!std::isfinite(tail)) {
            tail = 0.0;
        }
    }
    if (cls == FunctionClass::KInfinity && tail <= 0.0) {
        tail = 1.0;
    }
    return ComparisonFunction::table(nodes, std::move(y), tail, cls);
}

ComparisonFunction monotone_envelope(const Grid& nodes, std::vector<double> values, FunctionClass cls) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] == 0.0) {
            values[i] = 0.0;
        }
        if (i > 0) {
            const double floor = std::max(values[i - 1] + 1e-12 * (nodes[i] - nodes[i - 1]),
                                          std::nextafter(values[i - 1], kInf));
            values[i] = std::max(values[i], floor);
        }
    }
    const Grid& grid = nodes;
    return tabulate(
        [&](double r) {
            const auto it = std::lower_bound(grid.begin(), grid.end(), r);
            return values[static_cast<std::size_t>(it - grid.begin())];
        },
        nodes, cls);
}

// ---------------------------------------------------------------------------
// KLFunction

KLFunction KLFunction::composed(ComparisonFunction outer, ComparisonFunction inner) {
    return KLFunction(Form::Composed, std::move(outer), std::move(inner));
}

KLFunction KLFunction::product(ComparisonFunction g, ComparisonFunction h) {
    return KLFunction(Form::Product, std::move(g), std::move(h));
}

double KLFunction::operator()(double r, double t) const {
    if (!(t >= 0.0)) {
        throw DomainError("KL function evaluated at negative time");
    }
    if (form_ == Form::Composed) {
        return first_(second_(r) * std::exp(-t));
    }
    return first_(r) * second_(t);
}

KLFunction KLFunction::scaled(double c) const {
    return KLFunction(form_, first_.scaled(c), second_);
}

// ---------------------------------------------------------------------------
// TwoArgFunction

TwoArgFunction::TwoArgFunction(Map map, std::optional<double> first_arg_limit)
    : map_(std::make_shared<const Map>(std::move(map))), limit_(first_arg_limit) {}

double TwoArgFunction::operator()(double s, double r) const {
    if (!(s >= 0.0) || !(r >= 0.0)) {
        throw DomainError("two-argument function evaluated at a negative argument");
    }
    if (limit_ && s > *limit_) {
        throw IndexError("first argument " + format_number(s) + " exceeds family size " + format_number(*limit_));
    }
    return (*map_)(s, r);
}

// ---------------------------------------------------------------------------
// invert / verify_class

double invert(const ComparisonFunction& f, double y, InvertOptions options) {
    if (f.declared_class() != FunctionClass::KInfinity) {
        throw ClassError("invert requires a class K-infinity function");
    }
    if (!(y >= 0.0)) {
        throw DomainError("invert needs a nonnegative target value");
    }
    if (y == 0.0) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = 1.0;
    while (f(hi) < y) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) {
            throw ClassError("invert: bracket expansion did not reach the target value");
        }
    }
    const double target_tol = options.tolerance * (1.0 + y);
    double best = hi;
    double best_err = std::abs(f(hi) - y);
    for (int i = 0; i < options.max_iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double v = f(mid);
        const double err = std::abs(v - y);
        if (err < best_err) {
            best = mid;
            best_err = err;
        }
        if (v < y) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (best_err <= target_tol && hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
            break;
        }
    }
    return best;
}

InequalityCertificate verify_class(const ComparisonFunction& f, const Grid& grid) {
    return verify_class(f, f.declared_class(), grid);
}

InequalityCertificate verify_class(const ComparisonFunction& f, FunctionClass cls, const Grid& grid) {
    ClassCheck check("class " + std::string(to_string(cls)));
    if (grid.empty()) {
        check.condition(-kInf, "empty grid", {});
        return check.finish(grid);
    }
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values[i] = f(grid[i]);
        const double v = values[i];
        check.condition(std::isfinite(v) ? 0.0 : -kInf, "non-finite value", {grid[i]});
        check.condition(plain_slack(v), "negative value", {grid[i]});
    }
    const double at_origin = f(0.0);
    const double far = 1e6 * std::max(grid.back(), 1.0);

    switch (cls) {
    case FunctionClass::K:
    case FunctionClass::KInfinity: {
        check.condition(-std::abs(at_origin), "nonzero value at the origin", {0.0});
        if (grid.front() > 0.0) {
            check.condition(strict_slack(values.front() - at_origin), "not strictly increasing", {grid.front()});
        }
        for (std::size_t i = 1; i < grid.size(); ++i) {
            check.condition(strict_slack(values[i] - values[i - 1]), "not strictly increasing", {grid[i]});
        }
        if (cls == FunctionClass::KInfinity) {
            const auto known = f.unbounded_by_construction();
            double slack = 0.0;
            if (known) {
                slack = *known ? 1.0 : -1.0;
            } else {
                slack = strict_slack(f(far) - values.back());
            }
            check.condition(slack, "bounded (tail does not grow)", {far});
        }
        break;
    }
    case FunctionClass::L: {
        for (std::size_t i = 1; i < grid.size(); ++i) {
            check.condition(plain_slack(values[i - 1] - values[i]), "not nonincreasing", {grid[i]});
        }
        double slack = 0.0;
        if (f.kind() == ComparisonFunction::Kind::Table) {
            slack = (f.tail_exponent() < 0.0 || f.table_y().back() == 0.0) ? 1.0 : -1.0;
        } else {
            const double very_far = 1e12 * std::max(grid.back(), 1.0);
            const double scale = std::max(values.front(), std::numeric_limits<double>::min());
            slack = plain_slack(1e-6 * scale - f(very_far));
        }
        check.condition(slack, "does not decay to zero", {far});
        break;
    }
    case FunctionClass::PositiveDefinite: {
        check.condition(-std::abs(at_origin), "nonzero value at the origin", {0.0});
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i] > 0.0) {
                check.condition(strict_slack(values[i]), "not positive away from the origin", {grid[i]});
            }
        }
        break;
    }
    }
    return check.finish(grid);
}

InequalityCertificate verify_class(const KLFunction& beta, const Grid& r_grid, const Grid& t_grid) {
    ClassCheck check("class KL");
    if (r_grid.empty() || t_grid.empty()) {
        check.condition(-kInf, "empty grid", {});
        return check.finish(r_grid);
    }
    for (double t : t_grid) {
        double prev = beta(0.0, t);
        check.condition(-std::abs(prev), "nonzero value at r = 0", {0.0, t});
        for (double r : r_grid) {
            if (r == 0.0) {
                continue;
            }
            const double v = beta(r, t);
            check.condition(std::isfinite(v) ? 0.0 : -kInf, "non-finite value", {r, t});
            check.condition(strict_slack(v - prev), "not strictly increasing in r", {r, t});
            prev = v;
        }
    }
    constexpr double kFarTime = 1e9;
    for (double r : r_grid) {
        if (r == 0.0) {
            continue;
        }
        double prev = beta(r, t_grid.front());
        for (std::size_t j = 1; j < t_grid.size(); ++j) {
            const double v = beta(r, t_grid[j]);
            check.condition(plain_slack(prev - v), "not nonincreasing in t", {r, t_grid[j]});
            prev = v;
        }
        const double at_zero = beta(r, 0.0);
        check.condition(plain_slack(1e-6 * at_zero - beta(r, kFarTime)), "does not decay to zero in t",
                        {r, kFarTime});
    }
    return check.finish(r_grid);
}

}  // namespace iiss
