// AVX2/FMA variants of the normal CDF/PDF kernels. Compiled with -mavx2 -mfma
// and only reached through the runtime dispatch in dispatch.cpp.

#include "kernels_internal.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace mixplan::kernels {
namespace {

// Chebyshev coefficients of g(s) = log(erfc(z)) + z^2 - log(t) with
// t = 2 / (2 + z), s = 2t - 1, on s in [-1, 1] (z in [0, inf)). c[0] already
// carries the 1/2 factor. Truncation error below 1e-19.
constexpr double kErfcCheb[32] = {
    -6.51326859890854704e-01, 6.41969792356490210e-01,  1.94764732041858360e-02,
    -9.56151478680863226e-03, -9.46595344482036916e-04, 3.66839497852761447e-04,
    4.25233248069077689e-05,  -2.02785781125342418e-05, -1.62429000464702561e-06,
    1.30365583558052324e-06,  1.56264417220661419e-08,  -8.52380959149265415e-08,
    6.52905443909885149e-09,  5.05934349555146930e-09,  -9.91364156493033066e-10,
    -2.27365122293183597e-10, 9.64679110201552702e-11,  2.39403808303911459e-12,
    -6.88602752649755322e-12, 8.94487927309072531e-13,  3.13092139934295813e-13,
    -1.12708223613672523e-13, 3.81090525518923205e-16,  7.10609761360923712e-15,
    -1.52302820145710434e-15, -9.45749457129123340e-17, 1.21023718922427899e-16,
    -2.81666308774717710e-17, 5.00300555944590192e-20,  2.32810425795292529e-18,
    -8.44607768250900617e-19, 7.37684089322790684e-20,
};

constexpr double kLog2e = 1.4426950408889634074;
constexpr double kLn2Hi = 6.93147180369123816490e-01;  // upper 32 bits of ln 2
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kExpUnderflow = -745.2;

// exp(hi + lo) for |lo| << |hi| or small; lanes below the underflow limit
// return 0.
inline __m256d exp_pd(__m256d hi, __m256d lo)
{
    const __m256d x = _mm256_add_pd(hi, lo);
    const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(kExpUnderflow), _CMP_LT_OQ);
    const __m256d xc = _mm256_max_pd(x, _mm256_set1_pd(kExpUnderflow));
    const __m256d hic = _mm256_blendv_pd(hi, xc, underflow);
    const __m256d loc = _mm256_blendv_pd(lo, _mm256_setzero_pd(), underflow);

    const __m256d k = _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(kLog2e)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Hi), hic);
    r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Lo), r);
    r = _mm256_add_pd(r, loc);

    // Taylor polynomial to degree 13; |r| <= 0.35 gives < 5e-18 relative error.
    __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

    // 2^k as 2^k1 * 2^k2 so that both factors stay normal down to k = -1075.
    const __m256d k1 = _mm256_floor_pd(_mm256_mul_pd(k, _mm256_set1_pd(0.5)));
    const __m256d k2 = _mm256_sub_pd(k, k1);
    const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 2^52 + 2^51
    const __m256i bias = _mm256_set1_epi64x(1023);
    auto pow2 = [&](__m256d kk) {
        __m256i bits = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(kk, magic)),
                                        _mm256_castpd_si256(magic));
        bits = _mm256_slli_epi64(_mm256_add_epi64(bits, bias), 52);
        return _mm256_castsi256_pd(bits);
    };
    const __m256d result = _mm256_mul_pd(_mm256_mul_pd(p, pow2(k1)), pow2(k2));
    return _mm256_blendv_pd(result, _mm256_setzero_pd(), underflow);
}

// erfc(z) for z >= 0.
inline __m256d erfc_nonneg_pd(__m256d z)
{
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d t = _mm256_div_pd(two, _mm256_add_pd(two, z));
    const __m256d s = _mm256_sub_pd(_mm256_add_pd(t, t), _mm256_set1_pd(1.0));
    const __m256d s2 = _mm256_add_pd(s, s);

    __m256d b1 = _mm256_setzero_pd();
    __m256d b2 = _mm256_setzero_pd();
    for (int j = 31; j >= 1; --j) {
        const __m256d b0 = _mm256_add_pd(_mm256_fmsub_pd(s2, b1, b2), _mm256_set1_pd(kErfcCheb[j]));
        b2 = b1;
        b1 = b0;
    }
    const __m256d g = _mm256_add_pd(_mm256_fmsub_pd(s, b1, b2), _mm256_set1_pd(kErfcCheb[0]));

    // -z^2 split into a rounded head and the exact FMA residual.
    const __m256d sq = _mm256_mul_pd(z, z);
    const __m256d err = _mm256_fmsub_pd(z, z, sq);
    const __m256d hi = _mm256_sub_pd(_mm256_setzero_pd(), sq);
    const __m256d lo = _mm256_sub_pd(g, err);
    return _mm256_mul_pd(t, exp_pd(hi, lo));
}

inline __m256d abs_pd(__m256d x)
{
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

inline __m256d phi_cdf_pd(__m256d x)
{
    const __m256d z = _mm256_mul_pd(abs_pd(x), _mm256_set1_pd(detail::inv_sqrt2));
    const __m256d half_tail = _mm256_mul_pd(_mm256_set1_pd(0.5), erfc_nonneg_pd(z));
    const __m256d negative = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LT_OQ);
    return _mm256_blendv_pd(_mm256_sub_pd(_mm256_set1_pd(1.0), half_tail), half_tail, negative);
}

inline __m256d phi_pdf_pd(__m256d x)
{
    const __m256d half = _mm256_set1_pd(-0.5);
    const __m256d sq = _mm256_mul_pd(x, x);
    const __m256d err = _mm256_fmsub_pd(x, x, sq);
    return _mm256_mul_pd(_mm256_set1_pd(detail::inv_sqrt_2pi),
                         exp_pd(_mm256_mul_pd(half, sq), _mm256_mul_pd(half, err)));
}

inline __m256i tail_mask(std::size_t remaining)
{
    const __m256i lane = _mm256_setr_epi64x(0, 1, 2, 3);
    return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(remaining)), lane);
}

inline double hsum(__m256d v)
{
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

template <__m256d (*F)(__m256d)>
void map_avx2(const double* x, double* out, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, F(_mm256_loadu_pd(x + i)));
    if (i < n) {
        const __m256i m = tail_mask(n - i);
        _mm256_maskstore_pd(out + i, m, F(_mm256_maskload_pd(x + i, m)));
    }
}

template <__m256d (*F)(__m256d)>
double weighted_sum_avx2(const double* w, std::size_t n, double origin, double step)
{
    const __m256d vorigin = _mm256_set1_pd(origin);
    const __m256d vstep = _mm256_set1_pd(step);
    __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    const __m256d four = _mm256_set1_pd(4.0);
    __m256d acc = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d arg = _mm256_add_pd(vorigin, _mm256_mul_pd(vstep, idx));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), F(arg), acc);
        idx = _mm256_add_pd(idx, four);
    }
    if (i < n) {
        const __m256i m = tail_mask(n - i);
        const __m256d arg = _mm256_add_pd(vorigin, _mm256_mul_pd(vstep, idx));
        acc = _mm256_fmadd_pd(_mm256_maskload_pd(w + i, m), F(arg), acc);
    }
    return hsum(acc);
}

const KernelTable kAvx2{
    Isa::avx2,
    map_avx2<phi_cdf_pd>,
    map_avx2<phi_pdf_pd>,
    weighted_sum_avx2<phi_cdf_pd>,
    weighted_sum_avx2<phi_pdf_pd>,
};

}  // namespace

const KernelTable& detail::avx2_table_unchecked() { return kAvx2; }

}  // namespace mixplan::kernels
