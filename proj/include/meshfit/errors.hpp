#pragma once

#include <stdexcept>
#include <string>

namespace meshfit {

// Unreadable/malformed files, bad config keys, unusable inputs.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimization failures: divergence, singular systems, empty problems.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace meshfit
