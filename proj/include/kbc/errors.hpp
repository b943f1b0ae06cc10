#pragma once

#include <stdexcept>

namespace kbc {

// Error categories map to process exit codes: usage=1, data=2, numerical=3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kbc
