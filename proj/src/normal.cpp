#include "mixplan/normal.hpp"

#include "mixplan/errors.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <string>

namespace mixplan {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::validation: return "validation";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::resource: return "resource";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::internal: return "internal";
    }
    return "internal";
}

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kSqrt2 = 1.41421356237309504880;
}  // namespace

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double gaussian_upper(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double gaussian_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double gaussian_quantile(double q)
{
    if (!(q > 0.0 && q < 1.0))
        throw ValidationError("gaussian_quantile: argument must lie strictly inside (0, 1), got " +
                              std::to_string(q));
    // Phi^{-1}(q) = -sqrt(2) erfc^{-1}(2q); erfc_inv keeps full relative
    // precision in both tails.
    return -kSqrt2 * boost::math::erfc_inv(2.0 * q);
}

}  // namespace mixplan
