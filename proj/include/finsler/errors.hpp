#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Bad argument to an operation (dimension mismatch, wrong regime, ...).
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid construction parameters (non-SPD matrix, bad Morrey exponents, ...).
class ConfigurationError : public std::invalid_argument {
 public:
  explicit ConfigurationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Quantity undefined at the given point (R2 at xi = 0 when p < s).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

class SamplingError : public std::runtime_error {
 public:
  explicit SamplingError(const std::string& what) : std::runtime_error(what) {}
};

/// Variational problem that cannot be set up (e.g. Hardy weight identically zero).
class SetupError : public std::runtime_error {
 public:
  explicit SetupError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace finsler
