#ifndef HLME_ERRORS_HPP
#define HLME_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hlme {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct AsymmetricInput : std::runtime_error {
    explicit AsymmetricInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnknownExample : std::runtime_error {
    explicit UnknownExample(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalFailure : std::runtime_error {
    explicit NumericalFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct PreconditionViolated : std::runtime_error {
    explicit PreconditionViolated(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace hlme

#endif
