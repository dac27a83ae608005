#pragma once

#include <stdexcept>
#include <string>

namespace sboot {

/// Precondition violated by a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or non-finite input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Observation has no out-of-bag replicate.
class NotCovered : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An estimate or metric has no observations to average over.
class EstimateUndefined : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sboot
