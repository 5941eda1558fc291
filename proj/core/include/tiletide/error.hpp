#pragma once

#include <stdexcept>
#include <string>

namespace tiletide {

// Violated precondition on an argument.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Grid, quadrature or configuration cannot support the request.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A bounded search gave up before meeting its stopping rule.
class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tiletide
