#include "mixplan/kernels.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <vector>

using namespace mixplan;

namespace {

std::vector<double> sample_points()
{
    std::vector<double> x;
    for (double v = -12.0; v <= 12.0; v += 0.0371) x.push_back(v);
    x.push_back(0.0);
    x.push_back(-0.0);
    x.push_back(38.0);
    x.push_back(-38.0);
    x.push_back(1e-300);
    return x;
}

}  // namespace

TEST(Kernels, ScalarMatchesOracle)
{
    const auto& t = kernels::scalar_table();
    const auto x = sample_points();
    std::vector<double> c(x.size()), d(x.size());
    t.normal_cdf(x.data(), c.data(), x.size());
    t.normal_pdf(x.data(), d.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(c[i], oracle::Phi(x[i]), 1e-15);
        EXPECT_NEAR(d[i], oracle::phi(x[i]), 1e-16);
    }
}

TEST(Kernels, Avx2MatchesScalar)
{
    const auto* v = kernels::avx2_table();
    if (!v) GTEST_SKIP() << "AVX2 kernels not available on this machine";
    const auto& s = kernels::scalar_table();
    const auto x = sample_points();
    // Every tail length 0..7 exercises the remainder path.
    for (std::size_t n : {x.size(), x.size() - 1, x.size() - 3, std::size_t{7}, std::size_t{1}, std::size_t{0}}) {
        std::vector<double> a(n), b(n);
        s.normal_cdf(x.data(), a.data(), n);
        v->normal_cdf(x.data(), b.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(a[i], b[i], 2e-15) << x[i];
            if (a[i] > 1e-300) { EXPECT_NEAR(b[i] / a[i], 1.0, 1e-12) << x[i]; }
        }
        s.normal_pdf(x.data(), a.data(), n);
        v->normal_pdf(x.data(), b.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(a[i], b[i], 1e-16) << x[i];
            if (a[i] > 1e-300) { EXPECT_NEAR(b[i] / a[i], 1.0, 1e-12) << x[i]; }
        }
    }
}

TEST(Kernels, WeightedSumsAgree)
{
    const auto* v = kernels::avx2_table();
    if (!v) GTEST_SKIP() << "AVX2 kernels not available on this machine";
    const auto& s = kernels::scalar_table();
    oracle::Lcg rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 300);
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& x : w) total += (x = rng.uniform());
        for (auto& x : w) x /= total;
        const double origin = -6.0 + 12.0 * rng.uniform();
        const double step = -0.2 * rng.uniform();
        EXPECT_NEAR(s.weighted_cdf_sum(w.data(), n, origin, step), v->weighted_cdf_sum(w.data(), n, origin, step), 1e-14);
        EXPECT_NEAR(s.weighted_pdf_sum(w.data(), n, origin, step), v->weighted_pdf_sum(w.data(), n, origin, step), 1e-14);
    }
}

TEST(Kernels, WeightedSumDefinition)
{
    const auto& s = kernels::scalar_table();
    const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
    long double want = 0;
    for (int i = 0; i < 4; ++i) want += w[i] * oracle::Phi(0.5 - 0.3 * i);
    EXPECT_NEAR(s.weighted_cdf_sum(w.data(), 4, 0.5, -0.3), static_cast<double>(want), 1e-15);
}

TEST(Kernels, SelectSwitchesActiveTable)
{
    const auto before = kernels::active().isa;
    kernels::select(kernels::Isa::scalar);
    EXPECT_EQ(kernels::active().isa, kernels::Isa::scalar);
    kernels::select(before);
    EXPECT_EQ(kernels::active().isa, before);
}
