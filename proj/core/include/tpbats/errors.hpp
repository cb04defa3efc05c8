#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tpbats {

/// Argument outside the mathematical domain of an operation (inverse of zero,
/// probability outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Linear system without a unique solution.
class UnsolvableSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Misuse of the codec: empty source, mixed batch IDs, unknown batch, bad sizes.
class CodecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid or incomplete configuration. `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The innovative-packet curve saturates below the decoding target.
class InfeasibleTarget : public std::runtime_error {
 public:
  InfeasibleTarget(double saturation, double target, const std::string& what)
      : std::runtime_error(what), saturation_(saturation), target_(target) {}

  double saturation() const noexcept { return saturation_; }
  double target() const noexcept { return target_; }

 private:
  double saturation_;
  double target_;
};

}  // namespace tpbats
