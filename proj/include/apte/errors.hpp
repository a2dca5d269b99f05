// Error types shared across the library. DataError covers input/content
// problems (CLI exit code 2), EstimationError covers failures of the
// statistical machinery (exit code 3), ConfigError covers bad usage (exit 1).
#ifndef APTE_ERRORS_HPP
#define APTE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace apte {

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class EstimationError : public std::runtime_error {
public:
    explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace apte

#endif
