#pragma once

#include <stdexcept>
#include <string>

namespace jsseg {

/// Raised for malformed or inconsistent input data. The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace jsseg
