#pragma once

#include <stdexcept>
#include <string>

namespace smcmc {

// Bad user-supplied configuration (CLI, config file, schedule parameters).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A caller broke a documented precondition; always a programming error.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// A model plug-in rejected an observation or reached an invalid state.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// A supplied convergence certificate fails its own side conditions.
// Distinct from a bound violation, which would indicate a real bug.
class CertificateError : public std::runtime_error {
 public:
  explicit CertificateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace smcmc
