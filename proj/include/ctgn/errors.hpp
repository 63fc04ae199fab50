#pragma once

#include <stdexcept>
#include <string>

namespace ctgn {

// Caller broke a precondition (shape mismatch, negative duration, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// NaN/Inf produced during a forward pass or integration.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: unparsable files, invalid configuration, empty splits.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

}  // namespace ctgn

// Like require(), but the message is only built on failure.
#define CTGN_REQUIRE(cond, msg)                          \
  do {                                                   \
    if (!(cond)) throw ::ctgn::ContractViolation(msg);   \
  } while (0)

namespace ctgn {

}  // namespace ctgn
