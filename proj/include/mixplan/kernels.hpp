#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops. Every routine has a scalar reference
// implementation built on libm and, on x86-64, an AVX2/FMA variant. The
// active table is chosen once at startup from CPUID; MIXPLAN_ISA=scalar in the
// environment pins the reference path.
namespace mixplan::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
    Isa isa;
    // out[i] = Phi(x[i])
    void (*normal_cdf)(const double* x, double* out, std::size_t n);
    // out[i] = phi(x[i])
    void (*normal_pdf)(const double* x, double* out, std::size_t n);
    // sum_i w[i] * Phi(origin + step * i)
    double (*weighted_cdf_sum)(const double* w, std::size_t n, double origin, double step);
    // sum_i w[i] * phi(origin + step * i)
    double (*weighted_pdf_sum)(const double* w, std::size_t n, double origin, double step);
};

const KernelTable& scalar_table();

// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

const KernelTable& active();

// Test hook: switch the active table. Not thread-safe against concurrent
// kernel calls.
void select(Isa isa);

inline void normal_cdf(std::span<const double> x, std::span<double> out)
{
    active().normal_cdf(x.data(), out.data(), x.size());
}

inline void normal_pdf(std::span<const double> x, std::span<double> out)
{
    active().normal_pdf(x.data(), out.data(), x.size());
}

inline double weighted_cdf_sum(std::span<const double> w, double origin, double step)
{
    return active().weighted_cdf_sum(w.data(), w.size(), origin, step);
}

inline double weighted_pdf_sum(std::span<const double> w, double origin, double step)
{
    return active().weighted_pdf_sum(w.data(), w.size(), origin, step);
}

}  // namespace mixplan::kernels
