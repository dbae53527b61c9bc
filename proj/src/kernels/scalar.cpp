#include "kernels_internal.hpp"

#include <cmath>

namespace mixplan::kernels {
namespace {

inline double phi_cdf(double x) { return 0.5 * std::erfc(-x * detail::inv_sqrt2); }

inline double phi_pdf(double x) { return detail::inv_sqrt_2pi * std::exp(-0.5 * x * x); }

void normal_cdf_scalar(const double* x, double* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) out[i] = phi_cdf(x[i]);
}

void normal_pdf_scalar(const double* x, double* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) out[i] = phi_pdf(x[i]);
}

double weighted_cdf_sum_scalar(const double* w, std::size_t n, double origin, double step)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * phi_cdf(origin + step * static_cast<double>(i));
    return acc;
}

double weighted_pdf_sum_scalar(const double* w, std::size_t n, double origin, double step)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * phi_pdf(origin + step * static_cast<double>(i));
    return acc;
}

constexpr KernelTable kScalar{
    Isa::scalar,
    normal_cdf_scalar,
    normal_pdf_scalar,
    weighted_cdf_sum_scalar,
    weighted_pdf_sum_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace mixplan::kernels
