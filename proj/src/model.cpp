#include "mixplan/model.hpp"

#include "mixplan/errors.hpp"
#include "mixplan/kernels.hpp"
#include "mixplan/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mixplan {

MeanDistribution::MeanDistribution(double n, MixturePoint point, EvaluationMode mode)
    : n_(n), point_(point), mode_(mode)
{
    if (!(n >= 1.0) || !std::isfinite(n)) throw ValidationError("sample size must be at least 1");
    point_.validate();
    if (mode_ == EvaluationMode::exact) {
        if (n != std::floor(n))
            throw ValidationError("exact evaluation needs an integer sample size");
        weights_.emplace(static_cast<int>(n), point_.p);
        scale_ = std::sqrt(n / 2.0);
        center_ = 0.0;
    } else {
        const double p = point_.p, mu = point_.mu;
        scale_ = std::sqrt(n / (2.0 + (1.0 - p) * p * mu * mu));
        center_ = mu * p;
    }
}

// Exact law: Phi((x - k mu / n) sqrt(n/2)) over the retained k window is an
// arithmetic progression in k, which is what the weighted kernels consume.
double MeanDistribution::cdf(double x) const
{
    if (!weights_) return gaussian_cdf((x - center_) * scale_);
    const double step = -point_.mu / n_ * scale_;
    const double origin = (x - weights_->first() * point_.mu / n_) * scale_;
    return std::clamp(kernels::weighted_cdf_sum(weights_->weights(), origin, step), 0.0, 1.0);
}

double MeanDistribution::density(double x) const
{
    if (!weights_) return gaussian_pdf((x - center_) * scale_) * scale_;
    const double step = -point_.mu / n_ * scale_;
    const double origin = (x - weights_->first() * point_.mu / n_) * scale_;
    return scale_ * kernels::weighted_pdf_sum(weights_->weights(), origin, step);
}

void MeanDistribution::cdf(std::span<const double> x, std::span<double> out) const
{
    if (weights_) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = cdf(x[i]);
        return;
    }
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - center_) * scale_;
    kernels::normal_cdf(out.first(x.size()), out);
}

void MeanDistribution::density(std::span<const double> x, std::span<double> out) const
{
    if (weights_) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = density(x[i]);
        return;
    }
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - center_) * scale_;
    kernels::normal_pdf(out.first(x.size()), out);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] *= scale_;
}

double beta_single(int n, double eta, const MixturePoint& point, EvaluationMode mode)
{
    return MeanDistribution(n, point, mode).cdf(eta);
}

CornerMax beta_se_one_stage_detail(const StrongEffectRegion& region, int n, double alpha,
                                   EvaluationMode mode)
{
    if (!(alpha > 0.0 && alpha < 0.5)) throw ValidationError("alpha must lie in (0, 0.5)");
    if (n < 1) throw ValidationError("sample size must be at least 1");
    const double eta = gaussian_quantile(1.0 - alpha) * std::sqrt(2.0 / n);
    CornerMax best{-1.0, 0};
    for (std::size_t i = 0; i < region.size(); ++i) {
        const double b = beta_single(n, eta, region.corner(i), mode);
        if (b > best.value) best = {b, i};
    }
    return best;
}

double beta_se_one_stage(const StrongEffectRegion& region, int n, double alpha,
                         EvaluationMode mode)
{
    return beta_se_one_stage_detail(region, n, alpha, mode).value;
}

double likelihood_ratio_mean(double xbar, int n, const MixturePoint& point)
{
    if (n < 1) throw ValidationError("sample size must be at least 1");
    point.validate();
    const BinomialWeights w(n, point.p);
    // log-sum-exp over the retained terms
    std::vector<double> terms;
    terms.reserve(w.weights().size());
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.weights().size(); ++i) {
        const double m = (w.first() + static_cast<double>(i)) * point.mu / n;
        const double t = std::log(w.weights()[i]) + 0.5 * n * (xbar * m - 0.5 * m * m);
        terms.push_back(t);
        peak = std::max(peak, t);
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - peak);
    return std::exp(peak) * s;
}

}  // namespace mixplan
