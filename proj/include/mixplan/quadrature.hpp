#pragma once

#include "mixplan/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace mixplan {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {

struct Segment {
    double a, b, value, error;
};

// One 21-point Kronrod panel with the embedded 10-point Gauss rule as the
// error estimate. The integrand is called once with all 21 nodes.
template <class F>
Segment gk21_panel(F& f, double a, double b)
{
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    static const auto& xk = gauss_kronrod<double, 21>::abscissa();
    static const auto& wk = gauss_kronrod<double, 21>::weights();
    static const auto& wg = gauss<double, 10>::weights();

    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::array<double, 21> x;
    std::array<double, 21> y;
    x[0] = c;
    for (std::size_t i = 1; i < 11; ++i) {
        x[2 * i - 1] = c - h * xk[i];
        x[2 * i] = c + h * xk[i];
    }
    f(std::span<const double>(x), std::span<double>(y));

    double kronrod = wk[0] * y[0];
    double gauss_sum = 0.0;
    for (std::size_t i = 1; i < 11; ++i) {
        const double pair = y[2 * i - 1] + y[2 * i];
        kronrod += wk[i] * pair;
        if (i % 2 == 1) gauss_sum += wg[(i - 1) / 2] * pair;
    }
    return {a, b, kronrod * h, std::abs((kronrod - gauss_sum) * h)};
}

}  // namespace detail

// Globally adaptive G10/K21 quadrature of a batched integrand
// f(span<const double> x, span<double> y) over [a, b]. The panel with the
// largest error estimate is bisected until the summed estimate drops below
// abs_tol. Throws NumericalError when max_intervals is exhausted.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol = 1e-9,
                           int max_intervals = 200)
{
    if (a == b) return {};
    std::vector<detail::Segment> segs;
    segs.push_back(detail::gk21_panel(f, a, b));
    auto total_error = [&] {
        double e = 0.0;
        for (const auto& s : segs) e += s.error;
        return e;
    };
    while (total_error() > abs_tol) {
        if (static_cast<int>(segs.size()) >= max_intervals)
            throw NumericalError("quadrature did not reach the requested tolerance");
        auto worst = std::max_element(segs.begin(), segs.end(), [](const auto& l, const auto& r) {
            return l.error < r.error;
        });
        const double lo = worst->a, hi = worst->b, mid = 0.5 * (lo + hi);
        *worst = detail::gk21_panel(f, lo, mid);
        segs.push_back(detail::gk21_panel(f, mid, hi));
    }
    QuadratureResult out;
    for (const auto& s : segs) {
        out.value += s.value;
        out.error += s.error;
    }
    out.intervals = static_cast<int>(segs.size());
    return out;
}

}  // namespace mixplan
