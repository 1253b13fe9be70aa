#pragma once

#include <stdexcept>
#include <string>

namespace focalcount {

// Shape disagreement between operands. Message names the offending axes.
struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A precondition on an otherwise well-formed call was violated.
struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// NaN or Inf encountered where finite values are required.
struct finite_value_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input with no usable mass (e.g. an all-zero feature map).
struct degenerate_input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Blob placement exhausted its rejection-sampling budget.
struct placement_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config or CSV text that does not parse. Message names the offending key or line.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training aborted on a non-finite loss or update. Message names epoch and step.
struct training_diverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace focalcount
