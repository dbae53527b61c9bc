#include "mixplan/region.hpp"

#include "mixplan/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace mixplan {

void MixturePoint::validate() const
{
    if (!std::isfinite(mu) || mu < 0.0)
        throw ValidationError("point: mu must be a finite non-negative number");
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("point: p must lie in [0, 1]");
}

std::string_view to_string(EvaluationMode mode)
{
    return mode == EvaluationMode::exact ? "exact" : "approximate";
}

EvaluationMode parse_evaluation_mode(std::string_view text)
{
    if (text == "exact") return EvaluationMode::exact;
    if (text == "approximate" || text == "approx") return EvaluationMode::approximate;
    throw ValidationError("mode must be 'exact' or 'approximate', got '" + std::string(text) + "'");
}

StrongEffectRegion::StrongEffectRegion(std::vector<double> mu, std::vector<double> p)
    : mu_(std::move(mu)), p_(std::move(p))
{
    if (mu_.empty()) throw ValidationError("region: at least one corner is required");
    if (mu_.size() != p_.size())
        throw ValidationError("region: mu and p must have the same length");
    for (std::size_t i = 0; i < mu_.size(); ++i) {
        std::ostringstream where;
        where << "region corner " << i + 1 << ": ";
        if (!std::isfinite(mu_[i]) || mu_[i] <= 0.0)
            throw ValidationError(where.str() + "mu must be positive");
        if (!(p_[i] > 0.0 && p_[i] <= 1.0))
            throw ValidationError(where.str() + "p must lie in (0, 1]");
        if (i > 0 && !(mu_[i] < mu_[i - 1]))
            throw ValidationError(where.str() + "mu values must be strictly decreasing");
        if (i > 0 && !(p_[i] > p_[i - 1]))
            throw ValidationError(where.str() + "p values must be strictly increasing");
    }
}

std::vector<MixturePoint> StrongEffectRegion::corners() const
{
    std::vector<MixturePoint> out;
    out.reserve(mu_.size());
    for (std::size_t i = 0; i < mu_.size(); ++i) out.push_back({mu_[i], p_[i]});
    return out;
}

double StrongEffectRegion::mu_floor(double p) const
{
    // Steps overlap at their shared p_i; the later (smaller) mu wins there.
    double floor = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p_.size(); ++i)
        if (p >= p_[i]) floor = mu_[i];
    return floor;
}

bool StrongEffectRegion::contains(const MixturePoint& point) const
{
    if (point.p > 1.0) return false;
    return point.mu >= mu_floor(point.p);
}

}  // namespace mixplan
