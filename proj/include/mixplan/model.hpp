#pragma once

#include "mixplan/binomial.hpp"
#include "mixplan/region.hpp"

#include <cstddef>
#include <optional>
#include <span>

namespace mixplan {

// Law of the standardized treatment-minus-control mean X̄ after n patients
// per arm at alternative (mu, p):
//   exact:       sum_k Bin(k; n, p) N(k mu / n, 2 / n)
//   approximate: N(mu p, (2 + (1 - p) p mu^2) / n)
// The approximate law accepts a real-valued n, which the continuous n2
// search relies on.
class MeanDistribution {
public:
    MeanDistribution(double n, MixturePoint point, EvaluationMode mode);

    double n() const noexcept { return n_; }
    const MixturePoint& point() const noexcept { return point_; }
    EvaluationMode mode() const noexcept { return mode_; }

    // P(X̄ <= x)
    double cdf(double x) const;
    double density(double x) const;

    void cdf(std::span<const double> x, std::span<double> out) const;
    void density(std::span<const double> x, std::span<double> out) const;

private:
    double n_;
    MixturePoint point_;
    EvaluationMode mode_;
    double scale_;  // sqrt(n / 2) for exact, 1 / sd for approximate
    double center_;
    std::optional<BinomialWeights> weights_;
};

// P(X̄ <= eta): the type II error of the test X̄ > eta at a fixed alternative.
double beta_single(int n, double eta, const MixturePoint& point, EvaluationMode mode);

struct CornerMax {
    double value = 0.0;
    std::size_t corner = 0;  // first corner attaining the max
};

CornerMax beta_se_one_stage_detail(const StrongEffectRegion& region, int n, double alpha,
                                   EvaluationMode mode);

// Worst-case type II error of the one-stage test over the region.
double beta_se_one_stage(const StrongEffectRegion& region, int n, double alpha,
                         EvaluationMode mode);

// g(x̄)/f(x̄): density of X̄ under the alternative over its density under H0.
double likelihood_ratio_mean(double xbar, int n, const MixturePoint& point);

}  // namespace mixplan
