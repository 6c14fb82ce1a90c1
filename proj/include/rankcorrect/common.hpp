#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rankcorrect {

using ContextId = std::int32_t;
using ItemId = std::int32_t;

// Thrown on contract violations: out-of-range ids, invalid arguments.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown on IO and file-format problems.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw ContractError(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

}  // namespace rankcorrect
