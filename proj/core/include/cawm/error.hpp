#pragma once

#include <stdexcept>
#include <string>

namespace cawm {

// Invalid construction-time arguments: bad shapes, bad channel counts, bad config keys.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller misuse of a valid object: backward on a non-scalar, missing grads, ...
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numeric precondition was violated (e.g. delta <= 0 in ZOH).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input too small / empty for the operation.
struct DegenerateInputError : std::runtime_error {
    explicit DegenerateInputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CorruptCheckpointError : std::runtime_error {
    explicit CorruptCheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnsupportedFormatError : std::runtime_error {
    explicit UnsupportedFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cawm
