#pragma once

#include <stdexcept>
#include <string>

namespace lsl {

// Invalid parameters or inputs that violate a documented precondition.
// The CLI maps this to exit code 2.
struct config_error : std::invalid_argument {
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

// Runtime numerical failure: lost bracket, cell inversion, CFL violation,
// non-convergence.  The CLI maps this to exit code 3.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lsl
