#include "mixplan/one_stage.hpp"

#include "mixplan/errors.hpp"
#include "mixplan/normal.hpp"

#include <algorithm>
#include <cmath>

namespace mixplan {

void validate_error_rates(double alpha, double beta_max)
{
    if (!(alpha > 0.0 && alpha < 0.5)) throw ValidationError("alpha must lie in (0, 0.5)");
    if (!(beta_max > 0.0 && beta_max < 0.5))
        throw ValidationError("beta_max must lie in (0, 0.5)");
}

double approximate_sample_size(const StrongEffectRegion& region, double alpha, double beta_max)
{
    validate_error_rates(alpha, beta_max);
    const double za = gaussian_quantile(1.0 - alpha);
    const double zb = gaussian_quantile(1.0 - beta_max);
    double n = 0.0;
    for (const auto& c : region.corners()) {
        const double v = 2.0 + (1.0 - c.p) * c.p * c.mu * c.mu;
        const double root = (std::sqrt(2.0) * za + zb * std::sqrt(v)) / (c.mu * c.p);
        n = std::max(n, root * root);
    }
    return n;
}

double one_stage_threshold(int n, double alpha)
{
    return gaussian_quantile(1.0 - alpha) * std::sqrt(2.0 / n);
}

OneStageDesign plan_one_stage(const StrongEffectRegion& region, double alpha, double beta_max,
                              EvaluationMode mode)
{
    const double guess = approximate_sample_size(region, alpha, beta_max);
    auto ok = [&](int n) { return beta_se_one_stage(region, n, alpha, mode) <= beta_max; };

    int n = std::max(1, static_cast<int>(std::floor(guess)) - 5);
    if (ok(n)) {
        while (n > 1 && ok(n - 1)) --n;
    } else {
        do ++n;
        while (!ok(n));
    }
    return {n, alpha, one_stage_threshold(n, alpha)};
}

double one_stage_p_value(double xbar, int n)
{
    if (n < 1) throw ValidationError("sample size must be at least 1");
    return gaussian_upper(xbar * std::sqrt(n / 2.0));
}

}  // namespace mixplan
