#pragma once

#include <stdexcept>

namespace barter {

// Raised when a guarded computation would exceed its configured size or node limit.
class LimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace barter
