#pragma once

// Reference implementations used only by tests. Deliberately naive: long
// double, no truncation, no shared code with the library.

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <vector>

namespace oracle {

// erf(x) for x >= 0 via the all-positive series
// erf(x) = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1} / (1*3*...*(2n+1)).
inline long double erf_series(long double x)
{
    long double term = x, sum = x;
    for (int n = 1; n < 2000; ++n) {
        term *= 2.0L * x * x / (2.0L * n + 1.0L);
        sum += term;
        if (term < sum * 1e-21L) break;
    }
    return 2.0L / std::sqrt(3.14159265358979323846264338327950288L) * std::exp(-x * x) * sum;
}

inline double Phi(double x)
{
    const long double e = erf_series(std::fabs(static_cast<long double>(x)) / std::sqrt(2.0L));
    return static_cast<double>(x >= 0 ? 0.5L * (1.0L + e) : 0.5L * (1.0L - e));
}

inline double phi(double x)
{
    return static_cast<double>(std::exp(-0.5L * x * x) / std::sqrt(2.0L * 3.14159265358979323846264338327950288L));
}

// 1 - Phi(x); continued fraction phi(x) / (x + 1/(x + 2/(x + ...))) in the
// tail, where the series would cancel
inline double upper(double x)
{
    if (x < 3.0) return static_cast<double>(1.0L - static_cast<long double>(Phi(x)));
    const long double t = x;
    long double f = t;
    for (int k = 400; k >= 1; --k) f = t + k / f;
    return static_cast<double>(std::exp(-0.5L * t * t) /
                               std::sqrt(2.0L * 3.14159265358979323846264338327950288L) / f);
}

inline double quantile(double q)
{
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const bool below = q < 0.5 ? upper(-mid) < q : upper(mid) > 1.0 - q;
        (below ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline long double binom_pmf(int n, int k, long double p)
{
    if (p == 0.0L) return k == 0 ? 1.0L : 0.0L;
    if (p == 1.0L) return k == n ? 1.0L : 0.0L;
    return std::exp(std::lgamma(n + 1.0L) - std::lgamma(k + 1.0L) - std::lgamma(n - k + 1.0L) +
                    k * std::log(p) + (n - k) * std::log1p(-p));
}

// P(X̄ <= eta) summed over every k.
inline double beta_exact(int n, double eta, double mu, double p)
{
    long double s = 0.0L;
    for (int k = 0; k <= n; ++k)
        s += binom_pmf(n, k, p) * Phi((eta - k * mu / n) * std::sqrt(n / 2.0));
    return static_cast<double>(s);
}

inline double beta_approx(double n, double eta, double mu, double p)
{
    return Phi(std::sqrt(n) * (eta - mu * p) / std::sqrt(2.0 + (1.0 - p) * p * mu * mu));
}

// Composite Simpson on [a, b] with m (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int m = 4000)
{
    const double h = (b - a) / m;
    long double s = f(a) + f(b);
    for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0L : 2.0L) * f(a + i * h);
    return static_cast<double>(s * h / 3.0L);
}

// Brute-force step-up on sorted order, written from the definition.
inline std::vector<bool> step_up_reject(const std::vector<double>& p, const std::vector<double>& thr)
{
    const int M = static_cast<int>(p.size());
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    int K = 0;
    for (int k = M; k >= 1; --k)
        if (sorted[k - 1] <= thr[k - 1]) {
            K = k;
            break;
        }
    std::vector<bool> out(M, false);
    if (K == 0) return out;
    const double cut = sorted[K - 1];
    int taken = 0;
    for (int i = 0; i < M; ++i)
        if (p[i] < cut) {
            out[i] = true;
            ++taken;
        }
    for (int i = 0; i < M && taken < K; ++i)
        if (p[i] == cut) {
            out[i] = true;
            ++taken;
        }
    return out;
}

// One-sample Kolmogorov-Smirnov against U(0,1); returns the asymptotic p-value.
inline double ks_uniform_pvalue(std::vector<double> x)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        d = std::max(d, (i + 1) / n - x[i]);
        d = std::max(d, x[i] - i / n);
    }
    const double t = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double q = 0.0;
    for (int j = 1; j <= 200; ++j) q += 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * t * t);
    return std::clamp(q, 0.0, 1.0);
}

// Small deterministic generator for test inputs.
struct Lcg {
    std::uint64_t s;
    explicit Lcg(std::uint64_t seed) : s(seed * 2862933555777941757ULL + 3037000493ULL) {}
    double uniform()
    {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(s >> 11) * 0x1.0p-53;
    }
    double normal()
    {
        const double u1 = std::max(uniform(), 1e-300), u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
};

}  // namespace oracle
