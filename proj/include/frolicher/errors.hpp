#pragma once

#include <stdexcept>
#include <string>

namespace frol {

// Malformed input: bad JSON, unknown fields, unreadable files. CLI exit code 2.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A mathematical check failed (Jacobi, integrability, hypothesis). CLI exit code 1.
class MathError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violated internal invariant; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace frol
