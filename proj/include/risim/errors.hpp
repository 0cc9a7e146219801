#pragma once

#include <stdexcept>
#include <string>

namespace risim {

// Raised for malformed inputs: bad scenario files, geometry violations,
// inconsistent artifacts. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a computation cannot proceed: singular interaction matrix,
// diverging training run. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace risim
