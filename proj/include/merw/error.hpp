#pragma once

#include <stdexcept>
#include <string>

namespace merw {

// Malformed input text: config files, bad literals, unknown keys.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A documented operation precondition does not hold.
struct PreconditionError : std::invalid_argument {
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

// Power iteration failed to settle within max_iter (periodic or
// ill-conditioned reachable structure).
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// A measurement admitted no trajectories at all.
struct DegenerateEnsembleError : std::runtime_error {
    explicit DegenerateEnsembleError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace merw
