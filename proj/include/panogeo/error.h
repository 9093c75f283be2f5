#pragma once

#include <stdexcept>
#include <string>

namespace panogeo {

// Input outside the mathematical domain of an operation (pixel out of range,
// zero-length direction, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Violated precondition on shapes, counts or configuration.
class ContractError : public std::invalid_argument {
 public:
  explicit ContractError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Malformed or unsupported file content, or an I/O failure.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace panogeo
