#pragma once

#include <stdexcept>
#include <string>

namespace cokrig {

// Bad input: malformed data, violated preconditions, invalid configuration.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure: singular matrices, failed n.n.d. certificates,
// quadrature that cannot meet its tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cokrig
