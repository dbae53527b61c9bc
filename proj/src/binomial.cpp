#include "mixplan/binomial.hpp"

#include "mixplan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace mixplan {
namespace {

constexpr int kLogSpaceThreshold = 1000;

double log_pmf(int n, int k, double log_p, double log_q)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * log_p +
           (n - k) * log_q;
}

}  // namespace

BinomialWeights::BinomialWeights(int n, double p) : n_(n), p_(p)
{
    if (n < 0) throw ValidationError("binomial: n must be non-negative");
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("binomial: p must lie in [0, 1]");

    if (p == 0.0 || p == 1.0 || n == 0) {
        first_ = (p == 1.0) ? n : 0;
        weights_.assign(1, 1.0);
        return;
    }

    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const int mode = std::clamp(static_cast<int>(std::floor((n + 1) * p)), 0, n);
    const double ratio = p / (1.0 - p);

    // Walk outward from the mode; the anchor is the only term that goes
    // through lgamma when n is small.
    std::deque<double> window;
    const double anchor = std::exp(log_pmf(n, mode, log_p, log_q));
    window.push_back(anchor);

    int lo = mode;
    double w = anchor;
    while (lo > 0) {
        // pmf(k-1) = pmf(k) * k / (n-k+1) / ratio
        w = (n > kLogSpaceThreshold) ? std::exp(log_pmf(n, lo - 1, log_p, log_q))
                                     : w * lo / ((n - lo + 1) * ratio);
        if (w < kBinomialCutoff) break;
        window.push_front(w);
        --lo;
    }
    int hi = mode;
    w = anchor;
    while (hi < n) {
        // pmf(k+1) = pmf(k) * (n-k) / (k+1) * ratio
        w = (n > kLogSpaceThreshold) ? std::exp(log_pmf(n, hi + 1, log_p, log_q))
                                     : w * (n - hi) / (hi + 1.0) * ratio;
        if (w < kBinomialCutoff) break;
        window.push_back(w);
        ++hi;
    }

    first_ = lo;
    weights_.assign(window.begin(), window.end());
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    for (double& x : weights_) x /= total;
}

double BinomialWeights::weight(int k) const noexcept
{
    const int i = k - first_;
    if (i < 0 || i >= static_cast<int>(weights_.size())) return 0.0;
    return weights_[static_cast<std::size_t>(i)];
}

}  // namespace mixplan
