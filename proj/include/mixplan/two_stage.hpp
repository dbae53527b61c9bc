#pragma once

#include "mixplan/model.hpp"
#include "mixplan/region.hpp"

#include <optional>
#include <vector>

namespace mixplan {

// Stage 1 with n1 per arm: stop for futility if X̄1 < eta0, for efficacy if
// X̄1 > eta1; otherwise run n2 more per arm and reject if the pooled mean
// X̄ = (n1 X̄1 + n2 X̄2) / (n1 + n2) exceeds eta2.
struct TwoStageDesign {
    int n1 = 0;
    int n2 = 0;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double alpha = 0.0;
    double eta0 = 0.0;
    double eta1 = 0.0;
    double eta2 = 0.0;

    friend bool operator==(const TwoStageDesign&, const TwoStageDesign&) = default;
};

// Throws ValidationError unless n1, n2 >= 1, alpha0 in (0.5, 1) and
// 1 - alpha0 > alpha > alpha1 > 0.
void validate_two_stage_inputs(double n1, double alpha0, double alpha1, double n2, double alpha);

// Fills eta0, eta1, eta2 from the five free parameters.
TwoStageDesign make_two_stage_design(int n1, double alpha0, double alpha1, int n2, double alpha);

struct TrialData {
    double xbar1 = 0.0;
    std::optional<double> xbar2;
};

struct PlanDiagnostics {
    double q0 = 0.0;
    double q1 = 0.0;
    int total = 0;
    MixturePoint worst_point;
    double max_second_stage_probability = 0.0;
};

// Root of the level equation; n1 and n2 may be fractional.
double compute_eta2(double n1, double alpha0, double alpha1, double n2, double alpha);

// alpha1 + P0(eta0 <= X̄1 <= eta1, X̄ > xbar) for the design's stage sizes;
// the level equation reads level_function(eta2) = alpha.
double level_function(double n1, double alpha0, double alpha1, double n2, double xbar);

double two_stage_p_value(const TrialData& data, const TwoStageDesign& design);

// P(accept H0) at level alpha_eval. eta2 is re-derived for alpha_eval when it
// falls inside (alpha1, 1 - alpha0); outside that interval only stage 1 can
// reject and the threshold is z_{1-alpha_eval} sqrt(2 / n1).
double beta2(const TwoStageDesign& design, double alpha_eval, const MixturePoint& point,
             EvaluationMode mode);

CornerMax beta2_se_detail(const TwoStageDesign& design, double alpha_eval,
                          const StrongEffectRegion& region, EvaluationMode mode);
double beta2_se(const TwoStageDesign& design, double alpha_eval, const StrongEffectRegion& region,
                EvaluationMode mode);

double expected_n_null(const TwoStageDesign& design);
PlanDiagnostics expected_n_alt_max(const TwoStageDesign& design);
double second_stage_probability(const TwoStageDesign& design, const MixturePoint& point,
                                EvaluationMode mode);

struct FeasibilityConstraints {
    int n1_min = 1;
    int n1_max = 1;
    double alpha = 0.0;
    double beta_max = 0.0;
    std::vector<MixturePoint> corners;

    // Supremum of admissible alpha0 at this n1 (the constraint is strict).
    double alpha0_upper(int n1) const;
    // n1 in range, 0.5 < alpha0 < min(alpha0_upper(n1), 1 - alpha).
    bool admits(int n1, double alpha0) const;
};

FeasibilityConstraints feasibility(const StrongEffectRegion& region, double alpha,
                                   double beta_max, int n_one_stage);

struct SecondStageSearch {
    // Largest n2 tried; 0 means 10 x the approximate one-stage size.
    int n2_cap = 0;
    EvaluationMode mode = EvaluationMode::approximate;
};

int default_n2_cap(const StrongEffectRegion& region, double alpha, double beta_max);

// Minimal integer n2 with beta2_se(design, alpha, region, mode) <= beta_max.
// Throws InfeasibleError if none exists up to the cap.
int solve_n2(int n1, double alpha0, double alpha1, double alpha, const StrongEffectRegion& region,
             double beta_max, const SecondStageSearch& search = {});

// Real n2 at which the approximate worst-case beta2 equals beta_max; empty
// when even the cap does not reach it.
std::optional<double> solve_n2_continuous(int n1, double alpha0, double alpha1, double alpha,
                                          const StrongEffectRegion& region, double beta_max,
                                          int n2_cap);

// q1 as a function of alpha1 with the continuous n2; +inf where infeasible.
double relaxed_q1(int n1, double alpha0, double alpha1, double alpha,
                  const StrongEffectRegion& region, double beta_max, int n2_cap);

// alpha1 in (0, alpha) minimizing q1: grid of step 0.001, then golden-section
// refinement between the neighbours of the best grid point.
double optimize_alpha1(int n1, double alpha0, double alpha, const StrongEffectRegion& region,
                       double beta_max, int n2_cap = 0);

struct TwoStageOptions {
    std::optional<double> alpha1;  // fixed instead of optimized
    SecondStageSearch search;
    bool verify_exact = true;
};

struct TwoStagePlan {
    TwoStageDesign design;
    PlanDiagnostics diagnostics;
    double q0 = 0.0;
    int n_one_stage = 0;
    double beta_se = 0.0;  // worst-case beta2 at alpha, in the search mode
    std::size_t binding_corner = 0;
    std::optional<int> n2_exact;  // exact-mode minimal n2 when verified
    double beta_se_exact = -1.0;
};

TwoStagePlan plan_two_stage(const StrongEffectRegion& region, double alpha, double beta_max,
                            int n1, double alpha0, const TwoStageOptions& options = {});

}  // namespace mixplan
