#pragma once

#include <stdexcept>

namespace swarm {

// Time step outside the stability region of an explicit scheme.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-positive density in a cell.
class VacuumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swarm
