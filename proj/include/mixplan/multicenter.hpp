#pragma once

#include "mixplan/two_stage.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixplan {

enum class ProcedureKind { hochberg, benjamini_hochberg, bonferroni, custom };

std::string_view to_string(ProcedureKind kind);
ProcedureKind parse_procedure_kind(std::string_view text);

// Non-decreasing thresholds alpha(1) <= ... <= alpha(M).
class StepUpProcedure {
public:
    StepUpProcedure(ProcedureKind kind, int centers, double alpha);
    // Custom sequence; throws ValidationError if it decreases or leaves (0, 1).
    explicit StepUpProcedure(std::vector<double> thresholds);

    ProcedureKind kind() const noexcept { return kind_; }
    int centers() const noexcept { return static_cast<int>(thresholds_.size()); }
    double alpha() const noexcept { return alpha_; }
    std::span<const double> thresholds() const noexcept { return thresholds_; }
    // 1-based, as in alpha(k)
    double threshold(int k) const { return thresholds_.at(static_cast<std::size_t>(k - 1)); }

    friend bool operator==(const StepUpProcedure&, const StepUpProcedure&) = default;

private:
    ProcedureKind kind_;
    double alpha_;
    std::vector<double> thresholds_;
};

// Sort p-values ascending (ties by center index), find the largest k with
// p(k) <= alpha(k) and reject the k smallest. Returns center indices in
// ascending order.
std::vector<std::size_t> apply_step_up(std::span<const double> p_values,
                                       const StepUpProcedure& procedure);

// Same decision through the counts e_j = #{i : p_i <= alpha(j)}:
// K = max{j : e_j >= j}, reject every center with p_i <= alpha(K).
std::vector<std::size_t> apply_step_up_counts(std::span<const double> p_values,
                                              const StepUpProcedure& procedure);

// Centers that stopped after stage 1 for efficacy (p <= alpha1) but whose
// p-value exceeds alpha(1), so that their rejection hinges on the others.
std::vector<std::size_t> deferred_decision_centers(std::span<const double> p_values,
                                                   std::span<const bool> stopped_early,
                                                   double alpha1,
                                                   const StepUpProcedure& procedure);

struct CenterTargets {
    double alpha_M = 0.0;
    double beta_M_se = 0.0;
};

// Per-center level alpha(M) and type II target 1 - (1 - beta_max)^(1/M).
CenterTargets per_center_targets(int centers, double alpha, double beta_max,
                                 ProcedureKind kind = ProcedureKind::hochberg);

struct MulticenterDesign {
    int centers = 0;
    StepUpProcedure procedure{ProcedureKind::hochberg, 1, 0.05};
    TwoStageDesign center_design;
    double alpha = 0.0;
    double beta_max = 0.0;
    double beta_M_se = 0.0;
};

struct MulticenterPlan {
    MulticenterDesign design;
    TwoStagePlan center_plan;
    int n_one_stage = 0;  // per-center one-stage size at (alpha(M), beta_M_se)
};

// Identical two-stage designs in every center, planned at level alpha(M)
// against beta_M_se. Any alpha1 it picks is below alpha(M), which for
// Bonferroni is alpha / M.
MulticenterPlan plan_multicenter(int centers, const StrongEffectRegion& region, double alpha,
                                 double beta_max, int n1, double alpha0, ProcedureKind kind,
                                 const TwoStageOptions& options = {});

// Assemble from an existing center design (level alpha(M) is enforced).
MulticenterDesign make_multicenter_design(const TwoStageDesign& center_design,
                                          const StepUpProcedure& procedure, double beta_max);

// beta2_se of one center at level alpha(j).
double beta_j_se(const MulticenterDesign& design, int j, const StrongEffectRegion& region,
                 EvaluationMode mode = EvaluationMode::exact);

double beta_fw_bound(const MulticenterDesign& design, const StrongEffectRegion& region, int M1,
                     int m, EvaluationMode mode = EvaluationMode::exact);

constexpr int kEnumerationCap = 7;

enum class EnumerationMethod { collapsed, full };

struct FamilyWiseOptions {
    EvaluationMode mode = EvaluationMode::exact;
    EnumerationMethod method = EnumerationMethod::collapsed;
    int cap = kEnumerationCap;
};

// Distribution of the number of strong-effect centers left unrejected when
// M1 centers sit at strong_point and the rest are null. Entry f is P(F = f).
std::vector<double> failure_distribution(const MulticenterDesign& design,
                                         const MixturePoint& strong_point, int M1,
                                         const FamilyWiseOptions& options = {});

// P(at least m of the M1 strong-effect centers are not rejected).
double beta_fw_exact(const MulticenterDesign& design, const MixturePoint& strong_point, int M1,
                     int m, const FamilyWiseOptions& options = {});

enum class TableKind { bound, exact, empirical };
std::string_view to_string(TableKind kind);

struct ErrorCell {
    int M1 = 0;
    int m = 0;
    double value = 0.0;
};

struct ErrorTable {
    int centers = 0;
    TableKind kind = TableKind::exact;
    std::vector<ErrorCell> cells;  // M1 outer, m inner

    // NaN outside the stored cells.
    double at(int M1, int m) const;
};

ErrorTable beta_fw_table(const MulticenterDesign& design, const MixturePoint& strong_point,
                         const FamilyWiseOptions& options = {});
ErrorTable beta_fw_bound_table(const MulticenterDesign& design, const StrongEffectRegion& region,
                               EvaluationMode mode = EvaluationMode::exact);

// Columns M1,m,value,kind.
std::string error_table_csv(const ErrorTable& table);

}  // namespace mixplan
