#pragma once

#include <stdexcept>
#include <string>

namespace sprays {

// Precondition/runtime failures carry a message naming the violated contract.
class SprayError : public std::runtime_error {
 public:
  explicit SprayError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw SprayError(msg);
}

}  // namespace sprays
