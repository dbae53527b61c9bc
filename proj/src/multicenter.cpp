#include "mixplan/multicenter.hpp"

#include "mixplan/errors.hpp"
#include "mixplan/io.hpp"
#include "mixplan/one_stage.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

namespace mixplan {

std::string_view to_string(ProcedureKind kind)
{
    switch (kind) {
    case ProcedureKind::hochberg: return "hochberg";
    case ProcedureKind::benjamini_hochberg: return "benjamini_hochberg";
    case ProcedureKind::bonferroni: return "bonferroni";
    case ProcedureKind::custom: return "custom";
    }
    return "custom";
}

ProcedureKind parse_procedure_kind(std::string_view text)
{
    if (text == "hochberg") return ProcedureKind::hochberg;
    if (text == "benjamini_hochberg" || text == "benjamini-hochberg" || text == "bh")
        return ProcedureKind::benjamini_hochberg;
    if (text == "bonferroni") return ProcedureKind::bonferroni;
    if (text == "custom") return ProcedureKind::custom;
    throw ValidationError("unknown procedure '" + std::string(text) +
                          "' (hochberg, benjamini_hochberg, bonferroni, custom)");
}

StepUpProcedure::StepUpProcedure(ProcedureKind kind, int centers, double alpha)
    : kind_(kind), alpha_(alpha)
{
    if (kind == ProcedureKind::custom)
        throw ValidationError("custom procedures are built from explicit thresholds");
    if (centers < 1) throw ValidationError("number of centers must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    thresholds_.resize(static_cast<std::size_t>(centers));
    for (int k = 1; k <= centers; ++k) {
        double a = alpha;
        if (kind == ProcedureKind::hochberg) a = alpha / (centers + 1 - k);
        if (kind == ProcedureKind::benjamini_hochberg) a = k * alpha / centers;
        if (kind == ProcedureKind::bonferroni) a = alpha / centers;
        thresholds_[static_cast<std::size_t>(k - 1)] = a;
    }
}

StepUpProcedure::StepUpProcedure(std::vector<double> thresholds)
    : kind_(ProcedureKind::custom), alpha_(0.0), thresholds_(std::move(thresholds))
{
    if (thresholds_.empty()) throw ValidationError("threshold sequence must not be empty");
    for (std::size_t i = 0; i < thresholds_.size(); ++i) {
        if (!(thresholds_[i] > 0.0 && thresholds_[i] < 1.0))
            throw ValidationError("thresholds must lie in (0, 1)");
        if (i > 0 && thresholds_[i] < thresholds_[i - 1])
            throw ValidationError("thresholds must be non-decreasing");
    }
    alpha_ = thresholds_.back();
}

namespace {

void check_p_values(std::span<const double> p, const StepUpProcedure& procedure)
{
    if (static_cast<int>(p.size()) != procedure.centers())
        throw ValidationError("expected " + std::to_string(procedure.centers()) +
                              " p-values, got " + std::to_string(p.size()));
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("p-values must lie in [0, 1]");
}

}  // namespace

std::vector<std::size_t> apply_step_up(std::span<const double> p_values,
                                       const StepUpProcedure& procedure)
{
    check_p_values(p_values, procedure);
    std::vector<std::size_t> order(p_values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::size_t K = 0;
    for (std::size_t k = order.size(); k >= 1; --k) {
        if (p_values[order[k - 1]] <= procedure.threshold(static_cast<int>(k))) {
            K = k;
            break;
        }
    }
    std::vector<std::size_t> rejected(order.begin(), order.begin() + static_cast<long>(K));
    std::sort(rejected.begin(), rejected.end());
    return rejected;
}

std::vector<std::size_t> apply_step_up_counts(std::span<const double> p_values,
                                              const StepUpProcedure& procedure)
{
    check_p_values(p_values, procedure);
    const int M = procedure.centers();
    int K = 0;
    for (int j = M; j >= 1; --j) {
        const double a = procedure.threshold(j);
        const auto e = std::count_if(p_values.begin(), p_values.end(), [&](double v) { return v <= a; });
        if (e >= j) {
            K = j;
            break;
        }
    }
    std::vector<std::size_t> rejected;
    if (K == 0) return rejected;
    for (std::size_t i = 0; i < p_values.size(); ++i)
        if (p_values[i] <= procedure.threshold(K)) rejected.push_back(i);
    return rejected;
}

std::vector<std::size_t> deferred_decision_centers(std::span<const double> p_values,
                                                   std::span<const bool> stopped_early,
                                                   double alpha1,
                                                   const StepUpProcedure& procedure)
{
    check_p_values(p_values, procedure);
    if (stopped_early.size() != p_values.size())
        throw ValidationError("stopped_early must have one flag per center");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < p_values.size(); ++i)
        if (stopped_early[i] && p_values[i] <= alpha1 && p_values[i] > procedure.threshold(1))
            out.push_back(i);
    return out;
}

CenterTargets per_center_targets(int centers, double alpha, double beta_max, ProcedureKind kind)
{
    if (centers < 1) throw ValidationError("number of centers must be at least 1");
    if (!(alpha > 0.0 && alpha < 0.5)) throw ValidationError("alpha must lie in (0, 0.5)");
    const double cap = 1.0 - std::pow(0.5, centers);
    if (!(beta_max > 0.0 && beta_max < cap))
        throw ValidationError("beta_max must lie in (0, 1 - 0.5^M) = (0, " + format_fixed(cap) +
                              ")");
    if (kind == ProcedureKind::custom)
        throw ValidationError("per-center targets need a named procedure");
    const StepUpProcedure proc(kind, centers, alpha);
    return {proc.threshold(centers), 1.0 - std::pow(1.0 - beta_max, 1.0 / centers)};
}

MulticenterDesign make_multicenter_design(const TwoStageDesign& center_design,
                                          const StepUpProcedure& procedure, double beta_max)
{
    const int M = procedure.centers();
    if (std::abs(center_design.alpha - procedure.threshold(M)) > 1e-12)
        throw ValidationError("center design level must equal alpha(M) of the procedure");
    if (!(beta_max > 0.0 && beta_max < 1.0 - std::pow(0.5, M)))
        throw ValidationError("beta_max must lie in (0, 1 - 0.5^M)");
    MulticenterDesign d;
    d.centers = M;
    d.procedure = procedure;
    d.center_design = center_design;
    d.alpha = procedure.alpha();
    d.beta_max = beta_max;
    d.beta_M_se = 1.0 - std::pow(1.0 - beta_max, 1.0 / M);
    return d;
}

MulticenterPlan plan_multicenter(int centers, const StrongEffectRegion& region, double alpha,
                                 double beta_max, int n1, double alpha0, ProcedureKind kind,
                                 const TwoStageOptions& options)
{
    const auto targets = per_center_targets(centers, alpha, beta_max, kind);
    if (options.alpha1 && !(*options.alpha1 < targets.alpha_M))
        throw ValidationError("alpha1 must be below alpha(M) = " + format_fixed(targets.alpha_M));
    MulticenterPlan plan;
    plan.center_plan = plan_two_stage(region, targets.alpha_M, targets.beta_M_se, n1, alpha0, options);
    plan.design = make_multicenter_design(plan.center_plan.design,
                                          StepUpProcedure(kind, centers, alpha), beta_max);
    plan.n_one_stage = plan.center_plan.n_one_stage;
    return plan;
}

double beta_j_se(const MulticenterDesign& design, int j, const StrongEffectRegion& region,
                 EvaluationMode mode)
{
    if (j < 1 || j > design.centers) throw ValidationError("j must lie in 1..M");
    return beta2_se(design.center_design, design.procedure.threshold(j), region, mode);
}

namespace {

void check_cell(const MulticenterDesign& design, int M1, int m)
{
    if (M1 < 1 || M1 > design.centers) throw ValidationError("M1 must lie in 1..M");
    if (m < 1 || m > M1) throw ValidationError("m must lie in 1..M1");
}

// bins[j] for j = 1..M+1: P(alpha(j-1) < p <= alpha(j)) with alpha(0) = 0 and
// alpha(M+1) = 1, from the survival values S_j = P(p > alpha(j)).
std::vector<double> bin_masses(const std::vector<double>& survival)
{
    const std::size_t M = survival.size();
    std::vector<double> bins(M + 2, 0.0);
    double prev = 1.0;
    for (std::size_t j = 1; j <= M; ++j) {
        bins[j] = std::max(0.0, prev - survival[j - 1]);
        prev = survival[j - 1];
    }
    bins[M + 1] = std::max(0.0, prev);
    return bins;
}

std::vector<double> survival_strong(const MulticenterDesign& design, const MixturePoint& point,
                                    EvaluationMode mode)
{
    std::vector<double> s;
    for (int j = 1; j <= design.centers; ++j)
        s.push_back(beta2(design.center_design, design.procedure.threshold(j), point, mode));
    return s;
}

std::vector<double> survival_null(const MulticenterDesign& design)
{
    std::vector<double> s;
    for (int j = 1; j <= design.centers; ++j) s.push_back(1.0 - design.procedure.threshold(j));
    return s;
}

// Direct sum over all (M+1)^M bin assignments. The type II event for m is
// "e_j < j for every j >= j~" with j~ the first index at which fewer than m
// strong centers remain above alpha(j); tracking it for every m at once
// yields the failure count distribution.
std::vector<double> enumerate_full(int M, int M1, const std::vector<double>& strong,
                                   const std::vector<double>& null)
{
    std::vector<int> bin(static_cast<std::size_t>(M), 1);
    std::vector<double> dist(static_cast<std::size_t>(M1) + 1, 0.0);
    std::vector<int> e(static_cast<std::size_t>(M) + 2);
    while (true) {
        double prob = 1.0;
        for (int i = 0; i < M; ++i) prob *= (i < M1 ? strong : null)[static_cast<std::size_t>(bin[i])];
        if (prob > 0.0) {
            std::fill(e.begin(), e.end(), 0);
            for (int i = 0; i < M; ++i) ++e[static_cast<std::size_t>(bin[i])];
            for (int j = 1; j <= M; ++j) e[j] += e[j - 1];
            // largest m for which the event holds is the failure count
            int failures = 0;
            for (int m = M1; m >= 1; --m) {
                int jt = M + 1;
                for (int j = 1; j <= M; ++j) {
                    int above = 0;
                    for (int i = 0; i < M1; ++i) above += bin[i] > j;
                    if (above < m) {
                        jt = j;
                        break;
                    }
                }
                bool event = true;
                for (int j = jt; j <= M; ++j)
                    if (e[j] >= j) event = false;
                if (event) {
                    failures = m;
                    break;
                }
            }
            dist[static_cast<std::size_t>(failures)] += prob;
        }
        int pos = 0;
        while (pos < M && ++bin[pos] > M + 1) bin[pos++] = 1;
        if (pos == M) break;
    }
    return dist;
}

// Exchangeable classes: enumerate bin occupancy counts for the strong and
// the null centers separately and weight by multinomial probabilities.
void compositions(int items, int bins, std::vector<int>& cur, int at,
                  const std::function<void(const std::vector<int>&)>& visit)
{
    if (at == bins - 1) {
        cur[static_cast<std::size_t>(at)] = items;
        visit(cur);
        return;
    }
    for (int c = items; c >= 0; --c) {
        cur[static_cast<std::size_t>(at)] = c;
        compositions(items - c, bins, cur, at + 1, visit);
    }
}

double multinomial(const std::vector<int>& counts, const std::vector<double>& probs, int total)
{
    double logp = std::lgamma(total + 1.0);
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0) continue;
        if (probs[k + 1] <= 0.0) return 0.0;
        logp += counts[k] * std::log(probs[k + 1]) - std::lgamma(counts[k] + 1.0);
    }
    return std::exp(logp);
}

std::vector<double> enumerate_collapsed(int M, int M1, const std::vector<double>& strong,
                                        const std::vector<double>& null)
{
    struct Weighted {
        std::vector<int> counts;
        double prob;
    };
    auto collect = [&](int items, const std::vector<double>& probs) {
        std::vector<Weighted> out;
        std::vector<int> cur(static_cast<std::size_t>(M) + 1);
        compositions(items, M + 1, cur, 0, [&](const std::vector<int>& c) {
            const double p = multinomial(c, probs, items);
            if (p > 0.0) out.push_back({c, p});
        });
        return out;
    };
    const auto s = collect(M1, strong);
    const auto n = collect(M - M1, null);

    std::vector<double> dist(static_cast<std::size_t>(M1) + 1, 0.0);
    std::vector<int> e(static_cast<std::size_t>(M) + 1);
    for (const auto& a : s) {
        for (const auto& b : n) {
            // counts index k holds bin k+1
            int running = 0, K = 0;
            for (int j = 1; j <= M; ++j) {
                running += a.counts[static_cast<std::size_t>(j - 1)] + b.counts[static_cast<std::size_t>(j - 1)];
                if (running >= j) K = j;
            }
            int failures = 0;
            for (int j = K + 1; j <= M + 1; ++j) failures += a.counts[static_cast<std::size_t>(j - 1)];
            dist[static_cast<std::size_t>(failures)] += a.prob * b.prob;
        }
    }
    return dist;
}

}  // namespace

std::vector<double> failure_distribution(const MulticenterDesign& design,
                                         const MixturePoint& strong_point, int M1,
                                         const FamilyWiseOptions& options)
{
    const int M = design.centers;
    if (M > options.cap)
        throw ResourceError("exact enumeration is capped at M = " + std::to_string(options.cap) +
                            " centers (requested " + std::to_string(M) +
                            "); use the simulation endpoint for larger M");
    if (M1 < 1 || M1 > M) throw ValidationError("M1 must lie in 1..M");
    strong_point.validate();
    const auto strong = bin_masses(survival_strong(design, strong_point, options.mode));
    const auto null = bin_masses(survival_null(design));
    return options.method == EnumerationMethod::full ? enumerate_full(M, M1, strong, null)
                                                     : enumerate_collapsed(M, M1, strong, null);
}

double beta_fw_exact(const MulticenterDesign& design, const MixturePoint& strong_point, int M1,
                     int m, const FamilyWiseOptions& options)
{
    check_cell(design, M1, m);
    const auto dist = failure_distribution(design, strong_point, M1, options);
    double tail = 0.0;
    for (int f = M1; f >= m; --f) tail += dist[static_cast<std::size_t>(f)];
    return std::clamp(tail, 0.0, 1.0);
}

double beta_fw_bound(const MulticenterDesign& design, const StrongEffectRegion& region, int M1,
                     int m, EvaluationMode mode)
{
    check_cell(design, M1, m);
    const int j = M1 + 1 - m;
    return 1.0 - std::pow(1.0 - beta_j_se(design, j, region, mode), j);
}

std::string_view to_string(TableKind kind)
{
    switch (kind) {
    case TableKind::bound: return "bound";
    case TableKind::exact: return "exact";
    case TableKind::empirical: return "empirical";
    }
    return "exact";
}

double ErrorTable::at(int M1, int m) const
{
    for (const auto& c : cells)
        if (c.M1 == M1 && c.m == m) return c.value;
    return std::numeric_limits<double>::quiet_NaN();
}

ErrorTable beta_fw_table(const MulticenterDesign& design, const MixturePoint& strong_point,
                         const FamilyWiseOptions& options)
{
    ErrorTable t{design.centers, TableKind::exact, {}};
    for (int M1 = 1; M1 <= design.centers; ++M1) {
        const auto dist = failure_distribution(design, strong_point, M1, options);
        double tail = 0.0;
        std::vector<double> tails(static_cast<std::size_t>(M1) + 1);
        for (int f = M1; f >= 1; --f) {
            tail += dist[static_cast<std::size_t>(f)];
            tails[static_cast<std::size_t>(f)] = std::clamp(tail, 0.0, 1.0);
        }
        for (int m = 1; m <= M1; ++m) t.cells.push_back({M1, m, tails[static_cast<std::size_t>(m)]});
    }
    return t;
}

ErrorTable beta_fw_bound_table(const MulticenterDesign& design, const StrongEffectRegion& region,
                               EvaluationMode mode)
{
    ErrorTable t{design.centers, TableKind::bound, {}};
    std::vector<double> bj;
    for (int j = 1; j <= design.centers; ++j) bj.push_back(beta_j_se(design, j, region, mode));
    for (int M1 = 1; M1 <= design.centers; ++M1)
        for (int m = 1; m <= M1; ++m) {
            const int j = M1 + 1 - m;
            t.cells.push_back({M1, m, 1.0 - std::pow(1.0 - bj[static_cast<std::size_t>(j - 1)], j)});
        }
    return t;
}

std::string error_table_csv(const ErrorTable& table)
{
    std::string out = "M1,m,value,kind\n";
    for (const auto& c : table.cells)
        out += std::to_string(c.M1) + ',' + std::to_string(c.m) + ',' + format_fixed(c.value) + ',' +
               std::string(to_string(table.kind)) + '\n';
    return out;
}

}  // namespace mixplan
