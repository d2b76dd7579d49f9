#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tandemq {

// Base class for all toolkit errors. Callers that only need a CLI exit
// code can catch the concrete types below.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameter values (nonpositive rates, alpha outside (0,1), ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A station was asked for steady-state quantities while phi >= 1.
class UnstableError : public Error {
public:
    UnstableError(const std::string& what, double phi)
        : Error(what), phi_(phi) {}
    double phi() const { return phi_; }

private:
    double phi_;
};

// CSV/input parsing failure; line is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Estimation requested on an empty data set / empty stage.
class EmptyDataError : public Error {
public:
    using Error::Error;
};

// No server count within the search bound satisfies the constraints.
// Carries the best attempt so the caller can report it.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, int best_servers, int violations)
        : Error(what), best_servers_(best_servers), violations_(violations) {}
    int best_servers() const { return best_servers_; }
    int violations() const { return violations_; }

private:
    int best_servers_;
    int violations_;
};

} // namespace tandemq
