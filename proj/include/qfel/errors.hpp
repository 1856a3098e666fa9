#pragma once

#include <stdexcept>
#include <string>

namespace qfel {

// Invalid argument for an operation (index outside window, bad parameter, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A requested object does not fit the configured resource limits
// (basis dimension cap, photon cutoff too small for a seed state).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qfel
