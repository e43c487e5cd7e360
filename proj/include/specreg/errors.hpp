#pragma once

#include <stdexcept>
#include <string>

namespace specreg {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 2, NumericError -> 3, IoError -> 4.
// Domain/usage violations from library entry points throw
// std::invalid_argument or std::domain_error and map to 2 as well.

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace specreg
