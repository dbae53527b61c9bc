#pragma once

#include "mixplan/two_stage.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mixplan {

// start:stop:step with inclusive endpoints. Values are rounded to 12
// decimals so 0.55 + 16 * 0.025 lands on 0.95 exactly.
std::vector<double> parse_grid(std::string_view text);
std::vector<double> make_grid(double start, double stop, double step);
std::vector<double> default_alpha0_grid();  // 0.55:0.95:0.025

struct SweepRow {
    int n1 = 0;
    double alpha0 = 0.0;
    bool feasible = false;
    double alpha1 = 0.0;
    int n2 = 0;
    double eta0 = 0.0, eta1 = 0.0, eta2 = 0.0;
    double q0 = 0.0, q1 = 0.0;
    int total = 0;
};

struct SweepOptions {
    std::vector<int> n1_grid;        // empty: n1_min .. n_one_stage
    std::vector<double> alpha0_grid;  // empty: default_alpha0_grid()
    int n2_cap = 0;
    unsigned threads = 0;
};

struct SweepResult {
    int n_one_stage = 0;
    FeasibilityConstraints constraints;
    std::vector<SweepRow> rows;  // n1 outer, alpha0 inner
};

// One row per (n1, alpha0) pair; alpha1 optimized, n2 from the approximate
// search. Pairs outside the feasibility constraints, or for which no n2 up to
// the cap works, come back with feasible = false.
SweepResult sweep(const StrongEffectRegion& region, double alpha, double beta_max,
                  const SweepOptions& options = {});

SweepRow evaluate_cell(const StrongEffectRegion& region, double alpha, double beta_max,
                       const FeasibilityConstraints& constraints, int n1, double alpha0,
                       int n2_cap);

enum class SweepObjective { q0, q1, total };

// Feasible row minimizing the objective; ties go to the earlier row.
// Throws InfeasibleError when no row is feasible.
const SweepRow& best_row(const std::vector<SweepRow>& rows, SweepObjective objective);

// Header n1,alpha0,alpha1,n2,eta0,eta1,eta2,q0,q1,total,feasible.
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct Surface {
    std::vector<double> mu;
    std::vector<double> p;
    std::vector<double> values;  // values[i * p.size() + j] at (mu[i], p[j])

    double at(std::size_t i, std::size_t j) const { return values[i * p.size() + j]; }
};

Surface false_negative_surface(const TwoStageDesign& design, double alpha,
                               const std::vector<double>& mu_grid,
                               const std::vector<double>& p_grid, EvaluationMode mode,
                               unsigned threads = 0);

Surface second_stage_surface(const TwoStageDesign& design, const std::vector<double>& mu_grid,
                             const std::vector<double>& p_grid, EvaluationMode mode,
                             unsigned threads = 0);

// Long format mu,p,value with mu as the outer loop.
std::string surface_csv(const Surface& surface);

// Presentation-only heatmap.
std::string surface_svg(const Surface& surface, std::string_view title);

}  // namespace mixplan
