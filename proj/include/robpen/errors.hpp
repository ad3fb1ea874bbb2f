#pragma once

#include <stdexcept>
#include <string>

namespace robpen {

// Raised when a computation is well-posed as a request but fails numerically:
// non-finite integrands, singular systems, grids that do not bracket a minimum.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised for malformed experiment configurations.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace robpen
