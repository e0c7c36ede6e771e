#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace bankdyn {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number of the offending row.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& message)
        : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input parses but violates a model invariant (duplicate ids, negative weights, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Non-finite value produced while integrating.
class IntegrationError : public Error {
public:
    IntegrationError(std::string variable, double t)
        : Error("non-finite value in " + variable + " at t=" + std::to_string(t)),
          variable_(std::move(variable)), t_(t) {}

    [[nodiscard]] const std::string& variable() const noexcept { return variable_; }
    [[nodiscard]] double time() const noexcept { return t_; }

private:
    std::string variable_;
    double t_;
};

}  // namespace bankdyn
