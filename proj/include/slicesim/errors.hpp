#ifndef SLICESIM_ERRORS_HPP
#define SLICESIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace slicesim {

// Invalid scenario/config input, bad dimensions, malformed files.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Lookup of an id/profile that does not exist.
struct NotFoundError : std::runtime_error {
    explicit NotFoundError(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke an operation contract (e.g. a policy returned an
// action that is illegal in the current state). Never swallowed.
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace slicesim

#endif
