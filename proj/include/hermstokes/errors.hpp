#pragma once

#include <stdexcept>
#include <string>

namespace hermstokes {

/** @brief Rejected input: bad argument, malformed config, violated precondition. */
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** @brief A numerical guarantee the library promises did not hold at runtime. */
class invariant_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** @brief File or stream could not be read or written. */
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hermstokes
