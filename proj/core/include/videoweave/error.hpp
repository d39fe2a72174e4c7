#pragma once

#include <stdexcept>
#include <string>

namespace videoweave {

// Raised for malformed inputs, violated preconditions and IO failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace videoweave
