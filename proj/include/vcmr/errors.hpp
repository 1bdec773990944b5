#pragma once

#include <stdexcept>
#include <string>

namespace vcmr {

// Base for every validation or I/O failure raised by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A span with end <= start was passed where a positive-length span is required.
struct invalid_span_error : error {
    using error::error;
};

// Bad arguments to an operation (empty inputs, out-of-range thresholds, ...).
struct invalid_input_error : error {
    using error::error;
};

// Two vectors (or a record and its store) disagree on dimension.
struct dimension_error : error {
    using error::error;
};

// Two records share the same id within one store.
struct duplicate_id_error : error {
    using error::error;
};

// A vector component is NaN or infinite.
struct non_finite_error : error {
    using error::error;
};

// A file does not conform to its declared format.
struct format_error : error {
    using error::error;
};

// The file could not be opened, read, or written.
struct io_error : error {
    using error::error;
};

} // namespace vcmr
