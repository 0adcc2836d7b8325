#pragma once

#include <stdexcept>
#include <string>

namespace inkpipe {

// Failure to read or write a file or socket. The CLI maps it to exit code 1.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that violates a documented contract. The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace inkpipe
