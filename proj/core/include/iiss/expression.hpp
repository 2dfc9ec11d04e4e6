#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iiss {

/// Position of the first character of an expression inside a larger file,
/// used to report parse errors with file coordinates.
struct SourceOrigin {
    std::size_t line = 1;
    std::size_t column = 1;
};

/// A compiled arithmetic expression over a fixed list of named variables.
///
/// Grammar (usual precedence, `^` binds tighter than unary minus and is
/// right-associative):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := ('-' | '+') unary | power
///     power   := primary ('^' unary)?
///     primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
///
/// Functions: sin cos exp ln abs min max tanh sqrt. Constant: pi.
///
/// Evaluation never throws. Division by zero and ln of a nonpositive value
/// produce NaN, which callers treat as a failed evaluation.
class Expression {
public:
    static Expression parse(std::string_view text, const std::vector<std::string>& variables,
                            SourceOrigin origin = {});

    [[nodiscard]] double evaluate(std::span<const double> values) const noexcept;
    [[nodiscard]] const std::string& source() const noexcept;
    [[nodiscard]] const std::vector<std::string>& variables() const noexcept;
    /// True if the variable at `index` appears in the expression.
    [[nodiscard]] bool uses(std::size_t index) const noexcept;

private:
    struct Program;
    explicit Expression(std::shared_ptr<const Program> program);

    std::shared_ptr<const Program> program_;
};

}  // namespace iiss
