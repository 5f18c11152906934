#pragma once

#include <stdexcept>
#include <string>

namespace taskrl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shape or size mismatch between operands.
struct DimensionError : Error {
    using Error::Error;
};

/// A documented precondition was violated by the caller.
struct ContractError : Error {
    using Error::Error;
};

/// Invalid configuration value or unknown key.
struct ConfigError : Error {
    using Error::Error;
};

/// File read/write failure or malformed on-disk data.
struct IoError : Error {
    using Error::Error;
};

}  // namespace taskrl
