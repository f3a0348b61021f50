#pragma once

#include <stdexcept>
#include <string>

namespace lpc {

/// Malformed or truncated file / wire data.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decomposition failure or non-finite values inside a numerical kernel.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Socket-level failure, kept apart from simulated packet loss.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lpc
