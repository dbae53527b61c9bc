#pragma once

#include "mixplan/model.hpp"
#include "mixplan/region.hpp"

namespace mixplan {

// Reject H0: p = 0 when X̄ > eta, with n patients per arm.
struct OneStageDesign {
    int n = 0;
    double alpha = 0.0;
    double eta = 0.0;

    friend bool operator==(const OneStageDesign&, const OneStageDesign&) = default;
};

// Throws ValidationError unless 0 < alpha < 0.5 and 0 < beta_max < 0.5.
void validate_error_rates(double alpha, double beta_max);

// CLT estimate of the per-arm sample size, not rounded.
double approximate_sample_size(const StrongEffectRegion& region, double alpha, double beta_max);

// z_{1-alpha} sqrt(2/n)
double one_stage_threshold(int n, double alpha);

// Smallest n whose worst-case type II error over the region is <= beta_max.
OneStageDesign plan_one_stage(const StrongEffectRegion& region, double alpha, double beta_max,
                              EvaluationMode mode);

double one_stage_p_value(double xbar, int n);

}  // namespace mixplan
