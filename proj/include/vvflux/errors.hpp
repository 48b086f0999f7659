#pragma once

#include <stdexcept>
#include <string>

namespace vvflux {

/// Argument outside the mathematical domain of a function (non-finite input,
/// non-positive regularization width).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller violated an API precondition (dimension mismatch, bad index, empty grid).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid run configuration. `key()` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Flux/interface hypotheses rejected by the validators before any solve.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vvflux
