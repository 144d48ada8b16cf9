#pragma once

#include <stdexcept>
#include <string>

namespace lmmtaylor {

/// Invalid or inconsistent configuration. `field()` is a dotted path such as
/// `payoff.strike`, empty when the problem is not tied to a single field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Numerical failure: indefinite correlation, singular covariance, etc.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lmmtaylor
