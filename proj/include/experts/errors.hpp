#pragma once

#include <stdexcept>
#include <string>

namespace experts {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent configuration (spec files, CLI flags, matrices).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A fixed gain sequence was asked for a round past its last row.
class EndOfSequence : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Something that a proven property says cannot happen did happen.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace experts
