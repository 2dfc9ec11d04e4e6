#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iiss/errors.hpp"
#include "iiss/expression.hpp"

namespace iiss {

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// Sorted, duplicate-free set of nonnegative evaluation points.
using Grid = std::vector<double>;

Grid linear_grid(double lo, double hi, std::size_t points);
Grid log_grid(double lo, double hi, std::size_t points);
/// 64 log-spaced points over [1e-6, 1e6].
Grid default_grid();
/// Sorted union of any number of grids.
Grid merge_grids(std::initializer_list<const Grid*> grids);
Grid integer_grid(int first, int last);

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

struct CertificateTolerance {
    double absolute = 1e-9;
    double relative = 1e-6;
};

/// Result of checking an inequality LHS <= RHS pointwise over a finite grid.
///
/// `pass` holds exactly when `worst_slack >= -tolerance`; the tolerance is
/// `absolute + relative * max|LHS|` over the checked points.
struct InequalityCertificate {
    std::size_t points = 0;
    double grid_min = 0.0;
    double grid_max = 0.0;
    double worst_slack = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    /// Coordinates of the point where the worst slack occurred.
    std::vector<double> worst_point;
    std::string description;
};

/// Accumulates (LHS, RHS) pairs and produces an InequalityCertificate.
class CertificateBuilder {
public:
    explicit CertificateBuilder(std::string description, CertificateTolerance tol = {});

    void add(double lhs, double rhs, std::initializer_list<double> point);
    void add(double lhs, double rhs, const std::vector<double>& point);
    [[nodiscard]] InequalityCertificate finish() const;

private:
    std::string description_;
    CertificateTolerance tol_;
    std::size_t count_ = 0;
    double lhs_scale_ = 0.0;
    double worst_ = 0.0;
    bool nonfinite_ = false;
    bool has_extent_ = false;
    double grid_min_ = 0.0;
    double grid_max_ = 0.0;
    std::vector<double> worst_point_;
};

// ---------------------------------------------------------------------------
// ComparisonFunction
// ---------------------------------------------------------------------------

enum class FunctionClass { K, KInfinity, L, PositiveDefinite };

std::string_view to_string(FunctionClass c) noexcept;
FunctionClass function_class_from_string(std::string_view s);

/// A scalar map on [0, inf) with a declared comparison class.
///
/// Primitive kinds are exact. A table is a piecewise-linear interpolant over
/// strictly increasing nodes; below the first node it interpolates towards
/// the origin value, above the last node it follows y_last * (r/x_last)^tail.
/// An expression kind evaluates a DSL expression in the variable `r`.
///
/// Objects are immutable and cheap to copy.
class ComparisonFunction {
public:
    enum class Kind { Linear, Power, ExpMinusOne, Saturating, Table, Expr };

    /// a * r
    static ComparisonFunction linear(double a, FunctionClass cls = FunctionClass::KInfinity);
    /// a * r^b, b > 0
    static ComparisonFunction power(double a, double b, FunctionClass cls = FunctionClass::KInfinity);
    /// a * (e^{b r} - 1)
    static ComparisonFunction exp_minus_one(double a, double b, FunctionClass cls = FunctionClass::KInfinity);
    /// a * r / (1 + r)
    static ComparisonFunction saturating(double a, FunctionClass cls = FunctionClass::K);
    static ComparisonFunction table(std::vector<double> x, std::vector<double> y, double tail_exponent,
                                    FunctionClass cls);
    static ComparisonFunction expression(std::string_view text, FunctionClass cls);
    static ComparisonFunction identity() { return linear(1.0); }

    /// Throws DomainError for r < 0 or NaN.
    [[nodiscard]] double operator()(double r) const;
    [[nodiscard]] double evaluate(double r) const { return (*this)(r); }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] FunctionClass declared_class() const noexcept { return class_; }
    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double b() const noexcept { return b_; }
    [[nodiscard]] double tail_exponent() const noexcept { return tail_; }
    [[nodiscard]] const std::vector<double>& table_x() const;
    [[nodiscard]] const std::vector<double>& table_y() const;
    [[nodiscard]] const std::string& expression_text() const;

    /// c * f, same kind where possible.
    [[nodiscard]] ComparisonFunction scaled(double c) const;
    [[nodiscard]] ComparisonFunction with_class(FunctionClass cls) const;

    /// True when the function is known to be unbounded from its kind and
    /// parameters (tables: positive tail exponent).
    [[nodiscard]] std::optional<bool> unbounded_by_construction() const;

private:
    struct TableData {
        std::vector<double> x;
        std::vector<double> y;
    };

    ComparisonFunction() = default;
    [[nodiscard]] double table_value(double r) const;

    Kind kind_ = Kind::Linear;
    FunctionClass class_ = FunctionClass::KInfinity;
    double a_ = 1.0;
    double b_ = 1.0;
    double tail_ = 1.0;
    std::shared_ptr<const TableData> table_;
    std::shared_ptr<const Expression> expr_;
};

/// Sample f on `nodes` and return a table. The tail exponent is estimated from
/// the last two nodes unless `tail_exponent` is given.
ComparisonFunction tabulate(const std::function<double(double)>& f, const Grid& nodes, FunctionClass cls,
                            std::optional<double> tail_exponent = std::nullopt);

/// Running maximum plus a vanishing strict-increase correction, with value
/// 0 at r = 0. Returns a class-K table over `nodes`.
ComparisonFunction monotone_envelope(const Grid& nodes, std::vector<double> values, FunctionClass cls);

// ---------------------------------------------------------------------------
// KLFunction
// ---------------------------------------------------------------------------

/// beta(r, t), class K in r and decreasing to zero in t.
///
/// Composed form: outer(inner(r) * e^{-t}).
/// Product form:  g(r) * h(t), g class K and h class L.
class KLFunction {
public:
    enum class Form { Composed, Product };

    static KLFunction composed(ComparisonFunction outer, ComparisonFunction inner);
    static KLFunction product(ComparisonFunction g, ComparisonFunction h);
    /// r * e^{-t}
    static KLFunction exponential() {
        return composed(ComparisonFunction::identity(), ComparisonFunction::identity());
    }

    [[nodiscard]] double operator()(double r, double t) const;
    [[nodiscard]] Form form() const noexcept { return form_; }
    [[nodiscard]] const ComparisonFunction& first() const noexcept { return first_; }
    [[nodiscard]] const ComparisonFunction& second() const noexcept { return second_; }
    [[nodiscard]] KLFunction scaled(double c) const;

private:
    KLFunction(Form form, ComparisonFunction first, ComparisonFunction second)
        : form_(form), first_(std::move(first)), second_(std::move(second)) {}

    Form form_;
    ComparisonFunction first_;
    ComparisonFunction second_;
};

// ---------------------------------------------------------------------------
// Two-argument maps and families
// ---------------------------------------------------------------------------

/// (s, r) -> value, class K in each argument when the other is fixed positive.
class TwoArgFunction {
public:
    using Map = std::function<double(double, double)>;

    /// `first_arg_limit` bounds the admissible first argument (index-like
    /// maps); evaluating beyond it throws IndexError.
    explicit TwoArgFunction(Map map, std::optional<double> first_arg_limit = std::nullopt);

    [[nodiscard]] double operator()(double s, double r) const;
    [[nodiscard]] std::optional<double> first_arg_limit() const noexcept { return limit_; }

private:
    std::shared_ptr<const Map> map_;
    std::optional<double> limit_;
};

/// Family indexed by M = 1, 2, ..., size().
template <class F>
class IndexedFamily {
public:
    IndexedFamily() = default;
    explicit IndexedFamily(std::vector<F> members) : members_(std::move(members)) {}

    /// 1-based access; throws IndexError when M is outside 1..size().
    [[nodiscard]] const F& at(std::size_t index) const {
        if (index < 1 || index > members_.size()) {
            throw IndexError("family index " + std::to_string(index) + " outside 1.." +
                             std::to_string(members_.size()));
        }
        return members_[index - 1];
    }
    [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
    [[nodiscard]] bool empty() const noexcept { return members_.empty(); }
    [[nodiscard]] const std::vector<F>& members() const noexcept { return members_; }

private:
    std::vector<F> members_;
};

using FunctionFamily = IndexedFamily<ComparisonFunction>;
using KLFamily = IndexedFamily<KLFunction>;

// ---------------------------------------------------------------------------
// Basic operations
// ---------------------------------------------------------------------------

inline double evaluate(const ComparisonFunction& f, double r) { return f(r); }

struct InvertOptions {
    double tolerance = 1e-12;
    int max_iterations = 400;
};

/// Solve f(r) = y for a class-K-infinity f by bracket expansion and bisection.
/// Throws ClassError when f is not declared K-infinity.
double invert(const ComparisonFunction& f, double y, InvertOptions options = {});

/// Check the declared class invariants of f on `grid`.
/// Failures are reported in the certificate, never thrown.
InequalityCertificate verify_class(const ComparisonFunction& f, const Grid& grid);
InequalityCertificate verify_class(const ComparisonFunction& f, FunctionClass cls, const Grid& grid);
/// KL invariants: class K in r for every grid t, nonincreasing in t with
/// vanishing limit for every grid r > 0.
InequalityCertificate verify_class(const KLFunction& beta, const Grid& r_grid, const Grid& t_grid);

}  // namespace iiss
