#pragma once

#include <stdexcept>
#include <string>

namespace plap {

/// Violated precondition on a parameter or field (maps to exit code 2 in the CLI).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Hard solver failure (NaN, breakdown). Plain non-convergence is reported, not thrown.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define PLAP_REQUIRE(cond, msg)                                   \
    do {                                                          \
        if (!(cond)) throw ::plap::DomainError(std::string(msg)); \
    } while (0)

} // namespace plap
