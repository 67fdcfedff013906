#pragma once

#include <stdexcept>
#include <string>

namespace diastyle {

// Bad or inconsistent input data (malformed records, undersized cohorts, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure talking to a remote completion endpoint.
class RemoteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace diastyle
