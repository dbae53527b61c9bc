#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mixplan {

// A single alternative: standardized drug-specific effect `mu` and
// prevalence `p` of drug responders. p = 0 is the null hypothesis.
struct MixturePoint {
    double mu = 0.0;
    double p = 0.0;

    // Throws ValidationError unless mu >= 0 and 0 <= p <= 1.
    void validate() const;

    friend bool operator==(const MixturePoint&, const MixturePoint&) = default;
};

enum class EvaluationMode { exact, approximate };

std::string_view to_string(EvaluationMode mode);
EvaluationMode parse_evaluation_mode(std::string_view text);

// Staircase region of strong effect. Corner i is (mu_i, p_i); mu strictly
// decreasing, p strictly increasing, with an implicit p_{s+1} = 1 closing the
// top step. A point (mu, p) is inside when mu >= mu_i for the step
// p in [p_i, p_{i+1}].
class StrongEffectRegion {
public:
    // Throws ValidationError naming the violated condition.
    StrongEffectRegion(std::vector<double> mu, std::vector<double> p);

    std::size_t size() const noexcept { return mu_.size(); }
    std::span<const double> mu() const noexcept { return mu_; }
    std::span<const double> p() const noexcept { return p_; }
    MixturePoint corner(std::size_t i) const { return {mu_.at(i), p_.at(i)}; }
    std::vector<MixturePoint> corners() const;

    bool contains(const MixturePoint& point) const;

    // Smallest mu admitted at prevalence p (infinite below p_1).
    double mu_floor(double p) const;

    friend bool operator==(const StrongEffectRegion&, const StrongEffectRegion&) = default;

private:
    std::vector<double> mu_;
    std::vector<double> p_;
};

}  // namespace mixplan
