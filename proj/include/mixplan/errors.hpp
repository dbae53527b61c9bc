#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixplan {

enum class ErrorCode { validation, infeasible, resource, numerical, internal };

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Bad input: violated invariant, out-of-range parameter, malformed file.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message)
        : Error(ErrorCode::validation, message) {}
};

// Inputs are valid but no design satisfies the error-rate constraints.
class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& message)
        : Error(ErrorCode::infeasible, message) {}
};

// Request exceeds a documented computational cap.
class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& message)
        : Error(ErrorCode::resource, message) {}
};

// A root bracket or quadrature failed to converge.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& message)
        : Error(ErrorCode::numerical, message) {}
};

}  // namespace mixplan
