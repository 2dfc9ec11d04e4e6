#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iiss {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (negative radius, |d| > 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A function does not belong to the comparison class an operation needs.
class ClassError : public Error {
public:
    using Error::Error;
};

/// Family index out of range (family exhausted).
class IndexError : public Error {
public:
    using Error::Error;
};

/// A construct-and-certify routine ran out of doubling rounds.
class ConstructionError : public Error {
public:
    ConstructionError(const std::string& what, double worst_slack)
        : Error(what), worst_slack_(worst_slack) {}

    [[nodiscard]] double worst_slack() const noexcept { return worst_slack_; }

private:
    double worst_slack_;
};

/// Syntax or name-resolution failure while reading a text definition.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          message_(message), line_(line), column_(column) {}

    [[nodiscard]] const std::string& message() const noexcept { return message_; }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::string message_;
    std::size_t line_;
    std::size_t column_;
};

/// A required estimate slot is missing or fails its class check.
class SpecError : public Error {
public:
    using Error::Error;
};

}  // namespace iiss
