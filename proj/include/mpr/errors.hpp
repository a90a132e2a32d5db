#pragma once

#include <stdexcept>
#include <string>

namespace mpr {

struct invalid_parameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// d_i >= 0 or similar violations of the model's standing assumptions
struct standing_assumption_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct instability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numerical_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct index_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct degenerate_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct inconsistent_parameters : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

} // namespace mpr
