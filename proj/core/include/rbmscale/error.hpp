#pragma once

#include <stdexcept>
#include <string>

namespace rbmscale {

// Problem size exceeds what exact enumeration or diagonalization supports.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// An iterative method failed to converge, or training produced non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rbmscale
