#pragma once

#include <stdexcept>
#include <string>

namespace loopforge {

struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Requested an operation that needs a green (or stronger) weight on a chain
// that is not.
struct not_green_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct size_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct trapped_state_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct precision_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rejection sampler exceeded its attempt budget.
struct starvation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace loopforge
