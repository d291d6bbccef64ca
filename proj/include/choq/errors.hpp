#pragma once

#include <stdexcept>
#include <string>

namespace choq {

// Exit-code mapping used by the CLI front end:
//   validation_error -> 2, numeric_error -> 3, io_error -> 4.
struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace choq
