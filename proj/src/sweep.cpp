#include "mixplan/sweep.hpp"

#include "mixplan/errors.hpp"
#include "mixplan/io.hpp"
#include "mixplan/one_stage.hpp"
#include "mixplan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace mixplan {

std::vector<double> make_grid(double start, double stop, double step)
{
    if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
        throw ValidationError("grid bounds must be finite");
    if (!(step > 0.0)) throw ValidationError("grid step must be positive");
    if (stop < start) throw ValidationError("grid stop must not be below start");
    const double span = (stop - start) / step;
    if (span > 1e6) throw ValidationError("grid has too many points");
    const auto count = static_cast<long>(std::floor(span + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
        out.push_back(std::round((start + i * step) * 1e12) / 1e12);
    return out;
}

std::vector<double> parse_grid(std::string_view text)
{
    std::vector<double> parts;
    std::size_t pos = 0;
    while (true) {
        const auto colon = text.find(':', pos);
        const auto piece = text.substr(pos, colon == std::string_view::npos ? colon : colon - pos);
        try {
            std::size_t used = 0;
            const std::string s(piece);
            parts.push_back(std::stod(s, &used));
            if (used != s.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError("grid '" + std::string(text) + "' is not start:stop:step");
        }
        if (colon == std::string_view::npos) break;
        pos = colon + 1;
    }
    if (parts.size() == 1) return {parts[0]};
    if (parts.size() != 3)
        throw ValidationError("grid '" + std::string(text) + "' is not start:stop:step");
    return make_grid(parts[0], parts[1], parts[2]);
}

std::vector<double> default_alpha0_grid() { return make_grid(0.55, 0.95, 0.025); }

SweepRow evaluate_cell(const StrongEffectRegion& region, double alpha, double beta_max,
                       const FeasibilityConstraints& constraints, int n1, double alpha0,
                       int n2_cap)
{
    SweepRow row;
    row.n1 = n1;
    row.alpha0 = alpha0;
    if (!constraints.admits(n1, alpha0)) return row;
    try {
        TwoStageOptions opt;
        opt.search.n2_cap = n2_cap;
        opt.verify_exact = false;
        const double a1 = optimize_alpha1(n1, alpha0, alpha, region, beta_max, n2_cap);
        const int n2 = solve_n2(n1, alpha0, a1, alpha, region, beta_max, opt.search);
        const auto d = make_two_stage_design(n1, alpha0, a1, n2, alpha);
        const auto diag = expected_n_alt_max(d);
        row.feasible = true;
        row.alpha1 = a1;
        row.n2 = n2;
        row.eta0 = d.eta0;
        row.eta1 = d.eta1;
        row.eta2 = d.eta2;
        row.q0 = diag.q0;
        row.q1 = diag.q1;
        row.total = diag.total;
    } catch (const InfeasibleError&) {
        row.feasible = false;
    }
    return row;
}

SweepResult sweep(const StrongEffectRegion& region, double alpha, double beta_max,
                  const SweepOptions& options)
{
    SweepResult result;
    result.n_one_stage = plan_one_stage(region, alpha, beta_max, EvaluationMode::exact).n;
    result.constraints = feasibility(region, alpha, beta_max, result.n_one_stage);

    std::vector<int> n1_grid = options.n1_grid;
    if (n1_grid.empty())
        for (int n1 = result.constraints.n1_min; n1 <= result.constraints.n1_max; ++n1)
            n1_grid.push_back(n1);
    const std::vector<double> a0_grid =
        options.alpha0_grid.empty() ? default_alpha0_grid() : options.alpha0_grid;
    for (int n1 : n1_grid)
        if (n1 < 1) throw ValidationError("n1 grid values must be at least 1");
    const int cap = options.n2_cap > 0 ? options.n2_cap : default_n2_cap(region, alpha, beta_max);

    result.rows.resize(n1_grid.size() * a0_grid.size());
    parallel_for(
        result.rows.size(),
        [&](std::size_t k) {
            const int n1 = n1_grid[k / a0_grid.size()];
            const double a0 = a0_grid[k % a0_grid.size()];
            result.rows[k] = evaluate_cell(region, alpha, beta_max, result.constraints, n1, a0, cap);
        },
        options.threads);
    return result;
}

const SweepRow& best_row(const std::vector<SweepRow>& rows, SweepObjective objective)
{
    auto key = [&](const SweepRow& r) {
        switch (objective) {
        case SweepObjective::q0: return r.q0;
        case SweepObjective::q1: return r.q1;
        case SweepObjective::total: return static_cast<double>(r.total);
        }
        return r.q0;
    };
    const SweepRow* best = nullptr;
    for (const auto& r : rows)
        if (r.feasible && (!best || key(r) < key(*best))) best = &r;
    if (!best) throw InfeasibleError("no feasible (n1, alpha0) pair in the sweep");
    return *best;
}

std::string sweep_csv(const std::vector<SweepRow>& rows)
{
    std::string out = "n1,alpha0,alpha1,n2,eta0,eta1,eta2,q0,q1,total,feasible\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n1) + ',' + format_fixed(r.alpha0) + ',';
        if (r.feasible) {
            out += format_fixed(r.alpha1) + ',' + std::to_string(r.n2) + ',' + format_fixed(r.eta0) +
                   ',' + format_fixed(r.eta1) + ',' + format_fixed(r.eta2) + ',' +
                   format_fixed(r.q0) + ',' + format_fixed(r.q1) + ',' + std::to_string(r.total) +
                   ",true\n";
        } else {
            out += ",,,,,,,,false\n";
        }
    }
    return out;
}

namespace {

template <class F>
Surface fill_surface(const std::vector<double>& mu_grid, const std::vector<double>& p_grid,
                     unsigned threads, F&& value)
{
    if (mu_grid.empty() || p_grid.empty()) throw ValidationError("surface grids must not be empty");
    for (double mu : mu_grid)
        if (!(mu >= 0.0)) throw ValidationError("surface mu values must be non-negative");
    for (double p : p_grid)
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("surface p values must lie in [0, 1]");
    Surface s{mu_grid, p_grid, std::vector<double>(mu_grid.size() * p_grid.size())};
    parallel_for(
        s.values.size(),
        [&](std::size_t k) {
            s.values[k] = value(MixturePoint{mu_grid[k / p_grid.size()], p_grid[k % p_grid.size()]});
        },
        threads);
    return s;
}

}  // namespace

Surface false_negative_surface(const TwoStageDesign& design, double alpha,
                               const std::vector<double>& mu_grid,
                               const std::vector<double>& p_grid, EvaluationMode mode,
                               unsigned threads)
{
    return fill_surface(mu_grid, p_grid, threads, [&](const MixturePoint& pt) {
        return beta2(design, alpha, pt, mode);
    });
}

Surface second_stage_surface(const TwoStageDesign& design, const std::vector<double>& mu_grid,
                             const std::vector<double>& p_grid, EvaluationMode mode,
                             unsigned threads)
{
    return fill_surface(mu_grid, p_grid, threads, [&](const MixturePoint& pt) {
        return second_stage_probability(design, pt, mode);
    });
}

std::string surface_csv(const Surface& surface)
{
    std::string out = "mu,p,value\n";
    for (std::size_t i = 0; i < surface.mu.size(); ++i)
        for (std::size_t j = 0; j < surface.p.size(); ++j)
            out += format_fixed(surface.mu[i]) + ',' + format_fixed(surface.p[j]) + ',' +
                   format_fixed(surface.at(i, j)) + '\n';
    return out;
}

std::string surface_svg(const Surface& surface, std::string_view title)
{
    const std::size_t nx = surface.mu.size(), ny = surface.p.size();
    const double cell = std::max(2.0, std::min(24.0, 480.0 / std::max(nx, ny)));
    const double width = nx * cell + 80, height = ny * cell + 80;
    double lo = *std::min_element(surface.values.begin(), surface.values.end());
    double hi = *std::max_element(surface.values.begin(), surface.values.end());
    if (hi <= lo) hi = lo + 1.0;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    svg << "<text x=\"40\" y=\"20\" font-family=\"sans-serif\" font-size=\"12\">" << title
        << " [" << format_fixed(lo, 3) << ", " << format_fixed(hi, 3) << "]</text>\n";
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            // blue (low) to yellow (high)
            const double t = (surface.at(i, j) - lo) / (hi - lo);
            const int r = static_cast<int>(255 * t);
            const int g = static_cast<int>(60 + 180 * t);
            const int b = static_cast<int>(200 * (1.0 - t));
            svg << "<rect x=\"" << 40 + i * cell << "\" y=\"" << 40 + (ny - 1 - j) * cell
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << r << ','
                << g << ',' << b << ")\"/>\n";
        }
    }
    svg << "<text x=\"40\" y=\"" << height - 10
        << "\" font-family=\"sans-serif\" font-size=\"11\">mu (x) vs p (y)</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace mixplan
