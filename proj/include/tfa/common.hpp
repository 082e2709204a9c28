#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfa {

inline constexpr const char* kVersion = "0.1.0";

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shape / geometry mismatch between tensors or configs.
struct DimensionError : Error {
    using Error::Error;
};

/// A precondition of an operation was violated.
struct ContractError : Error {
    using Error::Error;
};

/// A file or byte stream does not match its declared format.
struct FormatError : Error {
    using Error::Error;
};

/// Non-finite values or other numeric breakdown.
struct NumericError : Error {
    using Error::Error;
};

/// Bad command line or config input.
struct UsageError : Error {
    using Error::Error;
};

inline std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

}  // namespace tfa
