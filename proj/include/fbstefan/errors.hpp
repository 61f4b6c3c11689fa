#pragma once

#include <stdexcept>
#include <string>

namespace fbstefan {

// Argument outside the admissible range of a constitutive function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// alpha <= 3/4: the diffusivity never changes sign.
class NoUnstableInterval : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inconsistent phase/front bookkeeping. Always a bug or corrupt input.
class StructuralError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class CflViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace fbstefan
