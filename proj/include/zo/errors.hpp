#pragma once

#include <stdexcept>
#include <string>

namespace zo {

// Shape mismatch between layered containers.
struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside its documented range.
struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite value where a finite one is required (diverged run, bad input).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-range experiment configuration.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace zo
