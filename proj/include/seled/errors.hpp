#pragma once

#include <stdexcept>
#include <string>

namespace seled {

// Bad user input or a violated type invariant. Exit code 2 at the CLI.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A solver or iterative routine failed to converge. Exit code 3 at the CLI.
// Callers that can recover keep the best-so-far result carried by the thrower.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure inside a closed computation (eigen-decomposition etc).
class ComputationError : public std::runtime_error {
public:
    explicit ComputationError(const std::string& what) : std::runtime_error(what) {}
};

// File / format problems. Exit code 4 at the CLI.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace seled
