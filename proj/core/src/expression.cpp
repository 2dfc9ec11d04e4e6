#include "iiss/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "iiss/errors.hpp"

namespace iiss {

namespace {

enum class OpCode {
    Constant,
    Variable,
    Negate,
    Add,
    Subtract,
    Multiply,
    Divide,
    Power,
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
    Tanh,
    Sqrt,
    Min,
    Max,
};

struct Instruction {
    OpCode op;
    double value = 0.0;
    std::size_t index = 0;
};

struct FunctionInfo {
    std::string_view name;
    OpCode op;
    int arity;
};

constexpr std::array<FunctionInfo, 9> kFunctions{{
    {"sin", OpCode::Sin, 1},
    {"cos", OpCode::Cos, 1},
    {"exp", OpCode::Exp, 1},
    {"ln", OpCode::Ln, 1},
    {"abs", OpCode::Abs, 1},
    {"tanh", OpCode::Tanh, 1},
    {"sqrt", OpCode::Sqrt, 1},
    {"min", OpCode::Min, 2},
    {"max", OpCode::Max, 2},
}};

enum class TokenKind { Number, Name, Symbol, End };

struct Token {
    TokenKind kind;
    std::string_view text;
    double number = 0.0;
    std::size_t line;
    std::size_t column;
};

class Lexer {
public:
    Lexer(std::string_view text, SourceOrigin origin)
        : text_(text), line_(origin.line), column_(origin.column) {}

    std::vector<Token> tokenize() {
        std::vector<Token> tokens;
        while (true) {
            skip_space();
            if (pos_ >= text_.size()) {
                tokens.push_back({TokenKind::End, {}, 0.0, line_, column_});
                return tokens;
            }
            const char c = text_[pos_];
            const std::size_t line = line_;
            const std::size_t column = column_;
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                tokens.push_back(read_number(line, column));
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos_;
                while (pos_ < text_.size() &&
                       (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                    advance();
                }
                tokens.push_back({TokenKind::Name, text_.substr(start, pos_ - start), 0.0, line, column});
            } else if (std::string_view("+-*/^(),").find(c) != std::string_view::npos) {
                advance();
                tokens.push_back({TokenKind::Symbol, text_.substr(pos_ - 1, 1), 0.0, line, column});
            } else {
                throw ParseError(std::string("unexpected character '") + c + "'", line, column);
            }
        }
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            advance();
        }
    }

    Token read_number(std::size_t line, std::size_t column) {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                advance();
            }
        };
        digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            advance();
            digits();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            const std::size_t save_pos = pos_;
            const std::size_t save_col = column_;
            advance();
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
                advance();
            }
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                digits();
            } else {
                pos_ = save_pos;
                column_ = save_col;
            }
        }
        const std::string_view lexeme = text_.substr(start, pos_ - start);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
        if (ec != std::errc() || ptr != lexeme.data() + lexeme.size()) {
            throw ParseError("malformed number '" + std::string(lexeme) + "'", line, column);
        }
        return {TokenKind::Number, lexeme, value, line, column};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_;
    std::size_t column_;
};

class Parser {
public:
    Parser(std::vector<Token> tokens, const std::vector<std::string>& variables)
        : tokens_(std::move(tokens)), variables_(variables) {}

    std::vector<Instruction> parse() {
        expression();
        const Token& t = peek();
        if (t.kind != TokenKind::End) {
            throw ParseError("unexpected '" + std::string(t.text) + "'", t.line, t.column);
        }
        return std::move(code_);
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& take() { return tokens_[pos_++]; }

    bool accept(char symbol) {
        const Token& t = peek();
        if (t.kind == TokenKind::Symbol && t.text[0] == symbol) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char symbol) {
        if (!accept(symbol)) {
            const Token& t = peek();
            const std::string found = t.kind == TokenKind::End ? "end of input" : "'" + std::string(t.text) + "'";
            throw ParseError(std::string("expected '") + symbol + "' but found " + found, t.line, t.column);
        }
    }

    void expression() {
        term();
        while (true) {
            if (accept('+')) {
                term();
                code_.push_back({OpCode::Add});
            } else if (accept('-')) {
                term();
                code_.push_back({OpCode::Subtract});
            } else {
                return;
            }
        }
    }

    void term() {
        unary();
        while (true) {
            if (accept('*')) {
                unary();
                code_.push_back({OpCode::Multiply});
            } else if (accept('/')) {
                unary();
                code_.push_back({OpCode::Divide});
            } else {
                return;
            }
        }
    }

    void unary() {
        if (accept('-')) {
            unary();
            code_.push_back({OpCode::Negate});
        } else if (accept('+')) {
            unary();
        } else {
            power();
        }
    }

    void power() {
        primary();
        if (accept('^')) {
            unary();
            code_.push_back({OpCode::Power});
        }
    }

    void primary() {
        const Token& t = take();
        switch (t.kind) {
        case TokenKind::Number:
            code_.push_back({OpCode::Constant, t.number});
            return;
        case TokenKind::Name:
            name(t);
            return;
        case TokenKind::Symbol:
            if (t.text[0] == '(') {
                expression();
                expect(')');
                return;
            }
            throw ParseError("unexpected '" + std::string(t.text) + "'", t.line, t.column);
        case TokenKind::End:
            throw ParseError("unexpected end of input", t.line, t.column);
        }
    }

    void name(const Token& t) {
        const auto fn = std::find_if(kFunctions.begin(), kFunctions.end(),
                                     [&](const FunctionInfo& f) { return f.name == t.text; });
        if (fn != kFunctions.end()) {
            expect('(');
            expression();
            int count = 1;
            while (accept(',')) {
                expression();
                ++count;
            }
            expect(')');
            if (count != fn->arity) {
                throw ParseError(std::string(fn->name) + " takes " + std::to_string(fn->arity) +
                                     " argument(s), got " + std::to_string(count),
                                 t.line, t.column);
            }
            code_.push_back({fn->op});
            return;
        }
        if (t.text == "pi") {
            code_.push_back({OpCode::Constant, std::numbers::pi});
            return;
        }
        const auto var = std::find(variables_.begin(), variables_.end(), t.text);
        if (var == variables_.end()) {
            throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.line, t.column);
        }
        code_.push_back({OpCode::Variable, 0.0, static_cast<std::size_t>(var - variables_.begin())});
    }

    std::vector<Token> tokens_;
    const std::vector<std::string>& variables_;
    std::size_t pos_ = 0;
    std::vector<Instruction> code_;
};

std::size_t stack_depth(const std::vector<Instruction>& code) {
    std::size_t depth = 0;
    std::size_t max_depth = 0;
    for (const auto& ins : code) {
        switch (ins.op) {
        case OpCode::Constant:
        case OpCode::Variable:
            ++depth;
            break;
        case OpCode::Add:
        case OpCode::Subtract:
        case OpCode::Multiply:
        case OpCode::Divide:
        case OpCode::Power:
        case OpCode::Min:
        case OpCode::Max:
            --depth;
            break;
        default:
            break;
        }
        max_depth = std::max(max_depth, depth);
    }
    return max_depth;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double run(const std::vector<Instruction>& code, std::span<const double> values, double* stack) noexcept {
    std::size_t top = 0;
    for (const auto& ins : code) {
        switch (ins.op) {
        case OpCode::Constant:
            stack[top++] = ins.value;
            break;
        case OpCode::Variable:
            stack[top++] = ins.index < values.size() ? values[ins.index] : kNaN;
            break;
        case OpCode::Negate:
            stack[top - 1] = -stack[top - 1];
            break;
        case OpCode::Add:
            --top;
            stack[top - 1] += stack[top];
            break;
        case OpCode::Subtract:
            --top;
            stack[top - 1] -= stack[top];
            break;
        case OpCode::Multiply:
            --top;
            stack[top - 1] *= stack[top];
            break;
        case OpCode::Divide:
            --top;
            stack[top - 1] = stack[top] == 0.0 ? kNaN : stack[top - 1] / stack[top];
            break;
        case OpCode::Power:
            --top;
            stack[top - 1] = std::pow(stack[top - 1], stack[top]);
            break;
        case OpCode::Min:
            --top;
            stack[top - 1] = std::min(stack[top - 1], stack[top]);
            break;
        case OpCode::Max:
            --top;
            stack[top - 1] = std::max(stack[top - 1], stack[top]);
            break;
        case OpCode::Sin:
            stack[top - 1] = std::sin(stack[top - 1]);
            break;
        case OpCode::Cos:
            stack[top - 1] = std::cos(stack[top - 1]);
            break;
        case OpCode::Exp:
            stack[top - 1] = std::exp(stack[top - 1]);
            break;
        case OpCode::Ln:
            stack[top - 1] = stack[top - 1] > 0.0 ? std::log(stack[top - 1]) : kNaN;
            break;
        case OpCode::Abs:
            stack[top - 1] = std::abs(stack[top - 1]);
            break;
        case OpCode::Tanh:
            stack[top - 1] = std::tanh(stack[top - 1]);
            break;
        case OpCode::Sqrt:
            stack[top - 1] = std::sqrt(stack[top - 1]);
            break;
        }
    }
    return stack[0];
}

}  // namespace

struct Expression::Program {
    std::string source;
    std::vector<std::string> variables;
    std::vector<Instruction> code;
    std::size_t depth = 0;
};

Expression::Expression(std::shared_ptr<const Program> program) : program_(std::move(program)) {}

Expression Expression::parse(std::string_view text, const std::vector<std::string>& variables,
                             SourceOrigin origin) {
    auto program = std::make_shared<Program>();
    program->source = std::string(text);
    program->variables = variables;
    Parser parser(Lexer(text, origin).tokenize(), program->variables);
    program->code = parser.parse();
    program->depth = stack_depth(program->code);
    return Expression(std::move(program));
}

double Expression::evaluate(std::span<const double> values) const noexcept {
    constexpr std::size_t kInline = 64;
    if (program_->depth <= kInline) {
        std::array<double, kInline> stack;
        return run(program_->code, values, stack.data());
    }
    std::vector<double> stack(program_->depth);
    return run(program_->code, values, stack.data());
}

const std::string& Expression::source() const noexcept { return program_->source; }

const std::vector<std::string>& Expression::variables() const noexcept { return program_->variables; }

bool Expression::uses(std::size_t index) const noexcept {
    return std::any_of(program_->code.begin(), program_->code.end(), [&](const Instruction& ins) {
        return ins.op == OpCode::Variable && ins.index == index;
    });
}

}  // namespace iiss
