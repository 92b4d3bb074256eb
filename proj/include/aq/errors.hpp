#pragma once

#include <stdexcept>
#include <string>

namespace aq {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed inputs: dimension mismatches, out-of-range labels, size caps.
// Distinct from validation failures, which are reported as values.
struct structural_error : error {
    using error::error;
};

struct zero_probability_error : error {
    using error::error;
};

struct invalid_cg_error : error {
    using error::error;
};

struct solver_error : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

} // namespace aq
