#pragma once

#include <stdexcept>
#include <string>

namespace peaklab {

/// Raised for precondition violations and numerical breakdowns.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace peaklab
