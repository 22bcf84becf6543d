#pragma once

#include <stdexcept>
#include <string>

namespace kyle {

class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& field, const std::string& detail = {})
        : std::runtime_error(detail.empty() ? field : field + ": " + detail), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ConvergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class DegenerateError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class SingularError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class InsufficientPaths : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class EffectiveSampleSizeTooLow : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace kyle
