#include "mixplan/two_stage.hpp"

#include "mixplan/errors.hpp"
#include "mixplan/kernels.hpp"
#include "mixplan/normal.hpp"
#include "mixplan/one_stage.hpp"
#include "mixplan/quadrature.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace mixplan {
namespace {

constexpr double kQuadTol = 1e-9;
constexpr double kEta2Residual = 1e-8;
constexpr double kAlpha1Step = 0.001;

// Stage geometry shared by the level equation, p-values and beta2.
struct Geometry {
    double n1, n2;
    double s1, s2;  // sqrt(n / 2)
    double c, r;    // (n1 + n2) / n2 and n1 / n2
    double z0, z1;  // z_{alpha0}, z_{1 - alpha1}
    double eta0, eta1;

    Geometry(double n1_, double alpha0, double alpha1, double n2_)
        : n1(n1_), n2(n2_), s1(std::sqrt(n1_ / 2.0)), s2(std::sqrt(n2_ / 2.0)),
          c((n1_ + n2_) / n2_), r(n1_ / n2_), z0(gaussian_quantile(alpha0)),
          z1(gaussian_quantile(1.0 - alpha1)), eta0(z0 / s1), eta1(z1 / s1)
    {
    }
};

// In u = s1 x1 the H0 stage-1 density is phi(u) and the stage-2 rejection
// probability at pooled threshold x is Phi(b u - a), a = c s2 x, b = r s2 / s1.
struct LevelValue {
    double value;
    double derivative;  // d/dx
};

LevelValue level_with_derivative(const Geometry& g, double alpha1, double x, bool want_derivative)
{
    const double a = g.c * g.s2 * x;
    const double b = g.r * g.s2 / g.s1;
    const auto value = integrate(
        [&](std::span<const double> u, std::span<double> y) {
            std::array<double, 21> arg, dens;
            for (std::size_t i = 0; i < u.size(); ++i) arg[i] = b * u[i] - a;
            kernels::normal_cdf(std::span<const double>(arg.data(), u.size()), y);
            kernels::normal_pdf(u, std::span<double>(dens.data(), u.size()));
            for (std::size_t i = 0; i < u.size(); ++i) y[i] *= dens[i];
        },
        g.z0, g.z1, kQuadTol);
    double deriv = 0.0;
    if (want_derivative) {
        const auto d = integrate(
            [&](std::span<const double> u, std::span<double> y) {
                std::array<double, 21> arg, dens;
                for (std::size_t i = 0; i < u.size(); ++i) arg[i] = b * u[i] - a;
                kernels::normal_pdf(std::span<const double>(arg.data(), u.size()), y);
                kernels::normal_pdf(u, std::span<double>(dens.data(), u.size()));
                for (std::size_t i = 0; i < u.size(); ++i) y[i] *= dens[i];
            },
            g.z0, g.z1, kQuadTol);
        deriv = -g.c * g.s2 * d.value;
    }
    return {alpha1 + value.value, deriv};
}

double eta2_for(const Geometry& g, double alpha1, double alpha)
{
    auto f = [&](double x, bool d) {
        auto v = level_with_derivative(g, alpha1, x, d);
        v.value -= alpha;
        return v;
    };

    // f decreases from 1 - alpha0 - alpha to alpha1 - alpha.
    const double h = std::sqrt(2.0 / (g.n1 + g.n2));
    double lo = -5.0 * h, hi = 5.0 * h;
    int widen = 0;
    while (f(lo, false).value <= 0.0) {
        lo -= 2.0 * (hi - lo);
        if (++widen > 60) throw NumericalError("compute_eta2: no sign change below the bracket");
    }
    widen = 0;
    while (f(hi, false).value >= 0.0) {
        hi += 2.0 * (hi - lo);
        if (++widen > 60) throw NumericalError("compute_eta2: no sign change above the bracket");
    }

    double x = std::clamp(gaussian_quantile(1.0 - alpha) * h, lo, hi);
    for (int iter = 0; iter < 200; ++iter) {
        const auto v = f(x, true);
        if (std::abs(v.value) <= 1e-13) return x;
        if (v.value > 0.0)
            lo = x;
        else
            hi = x;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            break;
        double next = (v.derivative < 0.0) ? x - v.value / v.derivative : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    const double residual = f(x, false).value;
    if (std::abs(residual) > kEta2Residual)
        throw NumericalError("compute_eta2: residual " + std::to_string(residual) +
                             " above tolerance");
    return x;
}

// P(accept) with pooled threshold eta2; n may be fractional in approximate mode.
double beta2_core(const Geometry& g, double eta2, const MixturePoint& point, EvaluationMode mode)
{
    const MeanDistribution first(g.n1, point, mode);
    const MeanDistribution second(g.n2, point, mode);
    const auto cont = integrate(
        [&](std::span<const double> x, std::span<double> y) {
            std::array<double, 21> arg, dens;
            for (std::size_t i = 0; i < x.size(); ++i) arg[i] = g.c * eta2 - g.r * x[i];
            second.cdf(std::span<const double>(arg.data(), x.size()), y);
            first.density(x, std::span<double>(dens.data(), x.size()));
            for (std::size_t i = 0; i < x.size(); ++i) y[i] *= dens[i];
        },
        g.eta0, g.eta1, kQuadTol);
    return std::clamp(first.cdf(g.eta0) + cont.value, 0.0, 1.0);
}

double worst_beta2_relaxed(const Geometry& g, double alpha1, double alpha,
                           const StrongEffectRegion& region)
{
    const double eta2 = eta2_for(g, alpha1, alpha);
    double worst = 0.0;
    for (std::size_t i = 0; i < region.size(); ++i)
        worst = std::max(worst, beta2_core(g, eta2, region.corner(i), EvaluationMode::approximate));
    return worst;
}

double stage_two_probability_max(double alpha0, double alpha1)
{
    return 2.0 * gaussian_cdf((gaussian_quantile(1.0 - alpha1) - gaussian_quantile(alpha0)) / 2.0) -
           1.0;
}

}  // namespace

void validate_two_stage_inputs(double n1, double alpha0, double alpha1, double n2, double alpha)
{
    if (!(n1 >= 1.0)) throw ValidationError("n1 must be at least 1");
    if (!(n2 >= 1.0)) throw ValidationError("n2 must be at least 1");
    if (!(alpha0 > 0.5 && alpha0 < 1.0)) throw ValidationError("alpha0 must lie in (0.5, 1)");
    if (!(alpha1 > 0.0)) throw ValidationError("alpha1 must be positive");
    if (!(alpha > alpha1))
        throw ValidationError("alpha1 must be below alpha, otherwise the second stage is not needed");
    if (!(1.0 - alpha0 > alpha))
        throw ValidationError("1 - alpha0 must exceed alpha, otherwise the second stage is not needed");
}

double level_function(double n1, double alpha0, double alpha1, double n2, double xbar)
{
    if (!(n1 >= 1.0 && n2 >= 1.0)) throw ValidationError("stage sizes must be at least 1");
    if (!(alpha0 > 0.5 && alpha0 < 1.0)) throw ValidationError("alpha0 must lie in (0.5, 1)");
    if (!(alpha1 > 0.0 && alpha1 < 1.0 - alpha0))
        throw ValidationError("alpha1 must lie in (0, 1 - alpha0)");
    return level_with_derivative(Geometry(n1, alpha0, alpha1, n2), alpha1, xbar, false).value;
}

double compute_eta2(double n1, double alpha0, double alpha1, double n2, double alpha)
{
    validate_two_stage_inputs(n1, alpha0, alpha1, n2, alpha);
    return eta2_for(Geometry(n1, alpha0, alpha1, n2), alpha1, alpha);
}

TwoStageDesign make_two_stage_design(int n1, double alpha0, double alpha1, int n2, double alpha)
{
    validate_two_stage_inputs(n1, alpha0, alpha1, n2, alpha);
    const Geometry g(n1, alpha0, alpha1, n2);
    TwoStageDesign d;
    d.n1 = n1;
    d.n2 = n2;
    d.alpha0 = alpha0;
    d.alpha1 = alpha1;
    d.alpha = alpha;
    d.eta0 = g.eta0;
    d.eta1 = g.eta1;
    d.eta2 = eta2_for(g, alpha1, alpha);
    return d;
}

double two_stage_p_value(const TrialData& data, const TwoStageDesign& design)
{
    const Geometry g(design.n1, design.alpha0, design.alpha1, design.n2);
    const bool continued = data.xbar1 >= design.eta0 && data.xbar1 <= design.eta1;
    if (continued != data.xbar2.has_value())
        throw ValidationError(continued
                                  ? "xbar2 is required when the first-stage mean lies in [eta0, eta1]"
                                  : "xbar2 must be absent when the trial stops after stage 1");
    if (!continued) return gaussian_upper(data.xbar1 * g.s1);
    const double pooled = (design.n1 * data.xbar1 + design.n2 * *data.xbar2) /
                          static_cast<double>(design.n1 + design.n2);
    const double p = level_with_derivative(g, design.alpha1, pooled, false).value;
    return std::clamp(p, design.alpha1, 1.0 - design.alpha0);
}

double beta2(const TwoStageDesign& design, double alpha_eval, const MixturePoint& point,
             EvaluationMode mode)
{
    if (!(alpha_eval > 0.0 && alpha_eval < 1.0))
        throw ValidationError("evaluation level must lie in (0, 1)");
    point.validate();
    const Geometry g(design.n1, design.alpha0, design.alpha1, design.n2);
    if (!(alpha_eval > design.alpha1 && alpha_eval < 1.0 - design.alpha0)) {
        const double threshold = gaussian_quantile(1.0 - alpha_eval) / g.s1;
        return MeanDistribution(design.n1, point, mode).cdf(threshold);
    }
    const double eta2 =
        (alpha_eval == design.alpha) ? design.eta2 : eta2_for(g, design.alpha1, alpha_eval);
    return beta2_core(g, eta2, point, mode);
}

CornerMax beta2_se_detail(const TwoStageDesign& design, double alpha_eval,
                          const StrongEffectRegion& region, EvaluationMode mode)
{
    CornerMax best{-1.0, 0};
    for (std::size_t i = 0; i < region.size(); ++i) {
        const double b = beta2(design, alpha_eval, region.corner(i), mode);
        if (b > best.value) best = {b, i};
    }
    return best;
}

double beta2_se(const TwoStageDesign& design, double alpha_eval, const StrongEffectRegion& region,
                EvaluationMode mode)
{
    return beta2_se_detail(design, alpha_eval, region, mode).value;
}

double expected_n_null(const TwoStageDesign& design)
{
    return design.n1 + (1.0 - design.alpha0 - design.alpha1) * design.n2;
}

PlanDiagnostics expected_n_alt_max(const TwoStageDesign& design)
{
    const double z0 = gaussian_quantile(design.alpha0);
    const double z1 = gaussian_quantile(1.0 - design.alpha1);
    if (!(z0 > 0.0 && z0 < z1))
        throw ValidationError("expected_n_alt_max needs 0 < z_{alpha0} < z_{1-alpha1}");
    PlanDiagnostics out;
    out.max_second_stage_probability = stage_two_probability_max(design.alpha0, design.alpha1);
    out.q0 = expected_n_null(design);
    out.q1 = design.n1 + out.max_second_stage_probability * design.n2;
    out.total = design.n1 + design.n2;
    out.worst_point = {(z1 + z0) / std::sqrt(2.0 * design.n1), 1.0};
    return out;
}

double second_stage_probability(const TwoStageDesign& design, const MixturePoint& point,
                                 EvaluationMode mode)
{
    const MeanDistribution first(design.n1, point, mode);
    return std::clamp(first.cdf(design.eta1) - first.cdf(design.eta0), 0.0, 1.0);
}

double FeasibilityConstraints::alpha0_upper(int n1) const
{
    const double zb = gaussian_quantile(1.0 - beta_max);
    const double s1 = std::sqrt(n1 / 2.0);
    double upper = 1.0;
    for (const auto& c : corners) {
        const double v = 1.0 + (1.0 - c.p) * c.p * c.mu * c.mu / 2.0;
        upper = std::min(upper, gaussian_cdf(s1 * c.mu * c.p - zb * std::sqrt(v)));
    }
    return upper;
}

bool FeasibilityConstraints::admits(int n1, double alpha0) const
{
    if (n1 < n1_min || n1 > n1_max) return false;
    if (!(alpha0 > 0.5 && alpha0 < 1.0 - alpha)) return false;
    return alpha0 < alpha0_upper(n1);
}

FeasibilityConstraints feasibility(const StrongEffectRegion& region, double alpha,
                                   double beta_max, int n_one_stage)
{
    validate_error_rates(alpha, beta_max);
    if (n_one_stage < 1) throw ValidationError("one-stage sample size must be at least 1");
    FeasibilityConstraints fc;
    fc.alpha = alpha;
    fc.beta_max = beta_max;
    fc.corners = region.corners();
    fc.n1_max = n_one_stage;
    const double zb = gaussian_quantile(1.0 - beta_max);
    double bound = 0.0;
    for (const auto& c : fc.corners) {
        const double root = zb * std::sqrt(2.0 + (1.0 - c.p) * c.p * c.mu * c.mu) / (c.mu * c.p);
        bound = std::max(bound, root * root);
    }
    fc.n1_min = static_cast<int>(std::floor(bound)) + 1;
    return fc;
}

int default_n2_cap(const StrongEffectRegion& region, double alpha, double beta_max)
{
    return 10 * static_cast<int>(std::ceil(approximate_sample_size(region, alpha, beta_max)));
}

std::optional<double> solve_n2_continuous(int n1, double alpha0, double alpha1, double alpha,
                                          const StrongEffectRegion& region, double beta_max,
                                          int n2_cap)
{
    validate_two_stage_inputs(n1, alpha0, alpha1, 1.0, alpha);
    if (n2_cap <= 0) n2_cap = default_n2_cap(region, alpha, beta_max);
    auto excess = [&](double n2) {
        return worst_beta2_relaxed(Geometry(n1, alpha0, alpha1, n2), alpha1, alpha, region) -
               beta_max;
    };
    const double at_one = excess(1.0);
    if (at_one <= 0.0) return 1.0;
    const double at_cap = excess(n2_cap);
    if (at_cap > 0.0) return std::nullopt;
    std::uintmax_t max_iter = 100;
    const auto bracket = boost::math::tools::toms748_solve(
        excess, 1.0, static_cast<double>(n2_cap), at_one, at_cap,
        boost::math::tools::eps_tolerance<double>(36), max_iter);
    return 0.5 * (bracket.first + bracket.second);
}

int solve_n2(int n1, double alpha0, double alpha1, double alpha, const StrongEffectRegion& region,
             double beta_max, const SecondStageSearch& search)
{
    validate_two_stage_inputs(n1, alpha0, alpha1, 1.0, alpha);
    const int cap = search.n2_cap > 0 ? search.n2_cap : default_n2_cap(region, alpha, beta_max);
    auto ok = [&](int n2) {
        const Geometry g(n1, alpha0, alpha1, n2);
        const double eta2 = eta2_for(g, alpha1, alpha);
        for (std::size_t i = 0; i < region.size(); ++i)
            if (beta2_core(g, eta2, region.corner(i), search.mode) > beta_max) return false;
        return true;
    };

    const auto relaxed = solve_n2_continuous(n1, alpha0, alpha1, alpha, region, beta_max, cap);
    int n2 = relaxed ? std::clamp(static_cast<int>(std::ceil(*relaxed)), 1, cap) : cap;
    if (ok(n2)) {
        while (n2 > 1 && ok(n2 - 1)) --n2;
        return n2;
    }
    while (n2 < cap) {
        if (ok(++n2)) return n2;
    }
    throw InfeasibleError("no second-stage size up to " + std::to_string(cap) +
                          " meets beta_max at n1=" + std::to_string(n1) +
                          ", alpha0=" + std::to_string(alpha0));
}

double relaxed_q1(int n1, double alpha0, double alpha1, double alpha,
                  const StrongEffectRegion& region, double beta_max, int n2_cap)
{
    const auto n2 = solve_n2_continuous(n1, alpha0, alpha1, alpha, region, beta_max, n2_cap);
    if (!n2) return std::numeric_limits<double>::infinity();
    return n1 + stage_two_probability_max(alpha0, alpha1) * *n2;
}

double optimize_alpha1(int n1, double alpha0, double alpha, const StrongEffectRegion& region,
                       double beta_max, int n2_cap)
{
    validate_two_stage_inputs(n1, alpha0, std::min(kAlpha1Step, alpha / 2.0), 1.0, alpha);
    if (n2_cap <= 0) n2_cap = default_n2_cap(region, alpha, beta_max);
    auto q1 = [&](double a1) { return relaxed_q1(n1, alpha0, a1, alpha, region, beta_max, n2_cap); };

    double best_a1 = 0.0;
    double best_q1 = std::numeric_limits<double>::infinity();
    for (int k = 1;; ++k) {
        const double a1 = k * kAlpha1Step;
        if (a1 >= alpha - 1e-12) break;
        const double v = q1(a1);
        if (v < best_q1) {
            best_q1 = v;
            best_a1 = a1;
        }
    }
    if (best_a1 == 0.0) {
        // level below the grid step: fall back to the midpoint
        best_a1 = alpha / 2.0;
        best_q1 = q1(best_a1);
    }
    if (!std::isfinite(best_q1))
        throw InfeasibleError("no alpha1 in (0, alpha) admits a second stage at n1=" +
                              std::to_string(n1) + ", alpha0=" + std::to_string(alpha0));

    const double lo = std::max(best_a1 - kAlpha1Step, 0.25 * best_a1);
    const double hi = std::min(best_a1 + kAlpha1Step, 0.5 * (best_a1 + alpha));
    const auto refined = boost::math::tools::brent_find_minima(q1, lo, hi, 20);
    return refined.second < best_q1 ? refined.first : best_a1;
}

TwoStagePlan plan_two_stage(const StrongEffectRegion& region, double alpha, double beta_max,
                            int n1, double alpha0, const TwoStageOptions& options)
{
    validate_error_rates(alpha, beta_max);
    SecondStageSearch search = options.search;
    if (search.n2_cap <= 0) search.n2_cap = default_n2_cap(region, alpha, beta_max);

    TwoStagePlan plan;
    const double alpha1 = options.alpha1
                              ? *options.alpha1
                              : optimize_alpha1(n1, alpha0, alpha, region, beta_max, search.n2_cap);
    const int n2 = solve_n2(n1, alpha0, alpha1, alpha, region, beta_max, search);
    plan.design = make_two_stage_design(n1, alpha0, alpha1, n2, alpha);
    plan.diagnostics = expected_n_alt_max(plan.design);
    plan.q0 = plan.diagnostics.q0;
    plan.n_one_stage = plan_one_stage(region, alpha, beta_max, EvaluationMode::exact).n;
    const auto se = beta2_se_detail(plan.design, alpha, region, search.mode);
    plan.beta_se = se.value;
    plan.binding_corner = se.corner;
    if (options.verify_exact) {
        plan.beta_se_exact = beta2_se(plan.design, alpha, region, EvaluationMode::exact);
        if (search.mode == EvaluationMode::exact) {
            plan.n2_exact = n2;
        } else {
            SecondStageSearch exact = search;
            exact.mode = EvaluationMode::exact;
            try {
                plan.n2_exact = solve_n2(n1, alpha0, alpha1, alpha, region, beta_max, exact);
            } catch (const InfeasibleError&) {
                plan.n2_exact.reset();
            }
        }
    }
    return plan;
}

}  // namespace mixplan
