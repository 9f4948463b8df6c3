#pragma once

#include <stdexcept>
#include <string>

namespace rslookback {

/// Bad user configuration: a model, query or numerics field violates its invariant.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation produced a non-finite value or left its numerical domain.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rslookback
