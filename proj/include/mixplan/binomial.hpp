#pragma once

#include <span>
#include <vector>

namespace mixplan {

// Binomial(n, p) probabilities restricted to the contiguous index range that
// carries non-negligible mass; weight(k) for k outside [first, first + size)
// is below kBinomialCutoff.
class BinomialWeights {
public:
    static constexpr double kBinomialCutoff = 1e-20;

    BinomialWeights(int n, double p);

    int n() const noexcept { return n_; }
    double p() const noexcept { return p_; }
    int first() const noexcept { return first_; }
    std::span<const double> weights() const noexcept { return weights_; }

    // Full-range probability, 0 outside the retained window.
    double weight(int k) const noexcept;

private:
    int n_;
    double p_;
    int first_ = 0;
    std::vector<double> weights_;
};

}  // namespace mixplan
