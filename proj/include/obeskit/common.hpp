#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace obeskit {

// Error taxonomy maps 1:1 onto CLI exit codes (config=2, data=3, internal=4).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

using EpochMs = std::int64_t;

constexpr std::int64_t kMsPerMinute = 60'000;
constexpr std::int64_t kMsPerHour = 3'600'000;
constexpr std::int64_t kMsPerDay = 86'400'000;

// Standard gravity, used when inputs declare acceleration in g.
constexpr double kGravityMs2 = 9.80665;

}  // namespace obeskit
