#pragma once

#include <stdexcept>
#include <string>

namespace revcap {

/// Adaptive quadrature or tail-truncation failure. The message carries the
/// interval and the offending estimate so callers can report where an
/// improper integral stopped converging.
class IntegrationError : public std::runtime_error {
public:
    explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

/// ODE integration / root bracketing / linear-solve degeneracy.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Config-file parse or validation failure, anchored to a line when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_ = 0;
};

}  // namespace revcap
