#pragma once

#include <stdexcept>
#include <string>

namespace mecsec {

// Thrown when a caller breaks a documented precondition (bad index, closed
// handle, shape mismatch).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid configuration value. `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

inline void expects(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

}  // namespace mecsec
