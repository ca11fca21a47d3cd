#pragma once

#include <stdexcept>
#include <string>

namespace wembsim {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file or record.
class parse_error : public error {
public:
    using error::error;
};

// An operation received a degenerate (empty-after-filter) sentence vector.
class degenerate_error : public error {
public:
    using error::error;
};

// Correlation of a zero-variance sample is undefined.
class undefined_correlation_error : public error {
public:
    using error::error;
};

// A numeric routine left the finite range (e.g. Sinkhorn epsilon too small).
class numerical_error : public error {
public:
    using error::error;
};

} // namespace wembsim
