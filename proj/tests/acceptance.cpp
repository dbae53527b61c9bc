#include "mixplan/errors.hpp"
#include "mixplan/model.hpp"
#include "mixplan/multicenter.hpp"
#include "mixplan/one_stage.hpp"
#include "mixplan/simulate.hpp"
#include "mixplan/sweep.hpp"
#include "mixplan/two_stage.hpp"

#include "oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace mixplan;

namespace {

const StrongEffectRegion kRegion({2.0, 1.0, 0.7}, {0.2, 0.4, 0.6});

struct Report {
    bool ok = true;
    std::ostringstream detail;

    // within(x, target, tol) records "name=x" and fails the line when off
    void within(const char* name, double x, double target, double tol)
    {
        const bool good = std::abs(x - target) <= tol + 1e-12;
        detail << name << '=' << x << (good ? "" : " [want " + fmt(target) + "+/-" + fmt(tol) + "]") << ' ';
        ok = ok && good;
    }
    void check(const char* name, bool good, const std::string& what = "")
    {
        detail << name << (what.empty() ? "" : "=" + what) << (good ? "" : " [fail]") << ' ';
        ok = ok && good;
    }
    static std::string fmt(double v)
    {
        std::ostringstream s;
        s << v;
        return s.str();
    }
};

int failures = 0;

void criterion(const char* name, double limit_seconds, const std::function<void(Report&)>& body)
{
    Report r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.ok = false;
        r.detail << "threw: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_seconds > 0 && secs > limit_seconds) {
        r.ok = false;
        r.detail << "[runtime over " << limit_seconds << " s] ";
    }
    if (!r.ok) ++failures;
    std::printf("%s %s (%.1f s): %s\n", r.ok ? "PASS" : "FAIL", name, secs, r.detail.str().c_str());
    std::fflush(stdout);
}

TwoStageDesign single_design() { return make_two_stage_design(55, 0.7, 0.026, 38, 0.05); }

MulticenterDesign multi_design(ProcedureKind kind = ProcedureKind::hochberg)
{
    return make_multicenter_design(make_two_stage_design(100, 0.7, 0.026, 65, 0.05),
                                   StepUpProcedure(kind, 4, 0.05), 0.2);
}

bool near_cell(const SweepRow& r, int n1, double alpha0, int n1_step)
{
    return std::abs(r.n1 - n1) <= n1_step && std::abs(r.alpha0 - alpha0) <= 0.025 + 1e-9;
}

std::string cell(const SweepRow& r)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%d,%.3f)", r.n1, r.alpha0);
    return buf;
}

std::vector<SweepRow> every_fifth(const std::vector<SweepRow>& rows)
{
    std::vector<SweepRow> out;
    for (const auto& r : rows)
        if (r.n1 % 5 == 0) out.push_back(r);
    return out;
}

std::vector<int> multiples_of_five(int hi)
{
    std::vector<int> g;
    for (int n1 = 5; n1 <= hi; n1 += 5) g.push_back(n1);
    return g;
}

void sweep_minimum(Report& r, const char* name, const std::vector<SweepRow>& rows, SweepObjective obj,
                   double value, double tol, int n1, double alpha0)
{
    const auto& best = best_row(rows, obj);
    const double v = obj == SweepObjective::q0 ? best.q0 : obj == SweepObjective::q1 ? best.q1 : best.total;
    r.within(name, v, value, tol);
    r.check("at", near_cell(best, n1, alpha0, 5), cell(best));
}

// (M1, m) reference cells, M1 outer; negative means "< 0.001"
struct Cell {
    int M1, m;
    double v;
};

void table_cells(Report& r, const ErrorTable& t, const std::vector<Cell>& cells, double tol)
{
    double worst = 0;
    for (const auto& c : cells) {
        const double x = t.at(c.M1, c.m);
        const double err = c.v < 0 ? std::max(0.0, x - 0.001) : std::abs(x - c.v);
        worst = std::max(worst, err);
        if (err > tol + 1e-12) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "(%d,%d)=%.4f vs %.3f", c.M1, c.m, x, c.v);
            r.check("cell", false, buf);
        }
    }
    r.detail << "max_dev=" << worst << ' ';
}

const std::vector<Cell> kBound{{1, 1, 0.305}, {2, 1, 0.469}, {2, 2, 0.305}, {3, 1, 0.534}, {3, 2, 0.469},
                               {3, 3, 0.305}, {4, 1, 0.200}, {4, 2, 0.534}, {4, 3, 0.469}, {4, 4, 0.305}};
const std::vector<Cell> kHochberg2{{1, 1, 0.303}, {2, 1, 0.464}, {2, 2, 0.091}, {3, 1, 0.515}, {3, 2, 0.170},
                                   {3, 3, 0.026}, {4, 1, 0.200}, {4, 2, 0.099}, {4, 3, 0.030}, {4, 4, 0.004}};
const std::vector<Cell> kHochberg12{{1, 1, 0.032}, {2, 1, 0.050}, {2, 2, 0.001}, {3, 1, 0.050}, {3, 2, 0.002},
                                    {3, 3, -1},    {4, 1, 0.002}, {4, 2, -1},    {4, 3, -1},    {4, 4, -1}};
const std::vector<Cell> kBh2{{1, 1, 0.298}, {2, 1, 0.380}, {2, 2, 0.082}, {3, 1, 0.200}, {3, 2, 0.069},
                             {3, 3, 0.014}, {4, 1, 0.200}, {4, 2, 0.027}, {4, 3, 0.009}, {4, 4, 0.002}};
const std::vector<Cell> kBh12{{1, 1, 0.032}, {2, 1, 0.033}, {2, 2, -1}, {3, 1, 0.003}, {3, 2, -1},
                              {3, 3, -1},    {4, 1, 0.002}, {4, 2, -1}, {4, 3, -1},    {4, 4, -1}};
// published 1000-replicate empirical digits
const std::vector<Cell> kEmpirical2{{1, 1, 0.294}, {2, 1, 0.498}, {2, 2, 0.099}, {3, 1, 0.523}, {3, 2, 0.179},
                                    {3, 3, 0.032}, {4, 1, 0.185}, {4, 2, 0.079}, {4, 3, 0.032}, {4, 4, 0.007}};
const std::vector<Cell> kEmpirical12{{1, 1, 0.041}, {2, 1, 0.044}, {2, 2, 0.001}, {3, 1, 0.043}, {3, 2, 0.0},
                                     {3, 3, 0.0},   {4, 1, 0.005}, {4, 2, 0.0},   {4, 3, 0.0},   {4, 4, 0.0}};

double binomial_sd(double v, long n) { return std::sqrt(std::max(v * (1 - v), 0.0) / static_cast<double>(n)); }

ErrorTable simulated_table(const MulticenterDesign& d, MixturePoint point, long reps, std::uint64_t seed,
                           bool known_sigma, double delta = 0.0)
{
    ErrorTable t;
    t.centers = d.centers;
    t.kind = TableKind::empirical;
    for (int M1 = 1; M1 <= d.centers; ++M1) {
        SimulationConfig cfg;
        cfg.M = d.centers;
        cfg.M1 = M1;
        cfg.strong_point = point;
        cfg.replications = reps;
        cfg.seed = seed;
        cfg.known_sigma = known_sigma;
        cfg.delta = delta;
        const auto r = empirical_beta_fw(cfg, d);
        t.cells.insert(t.cells.end(), r.table.cells.begin(), r.table.cells.end());
    }
    return t;
}

}  // namespace

int main()
{
    criterion("one-stage plan", 1.0, [](Report& r) {
        const auto d = plan_one_stage(kRegion, 0.05, 0.2, EvaluationMode::exact);
        r.within("n", d.n, 86, 0);
        r.within("eta", d.eta, 0.251, 0.001);
        r.within("approx_n", approximate_sample_size(kRegion, 0.05, 0.2), 85.3, 0.1);
    });

    criterion("two-stage plan (55, 0.7)", 10.0, [](Report& r) {
        const auto plan = plan_two_stage(kRegion, 0.05, 0.2, 55, 0.7);
        const auto& d = plan.design;
        r.within("alpha1", d.alpha1, 0.026, 0.002);
        r.within("n2", d.n2, 38, 1);
        r.within("eta0", d.eta0, 0.10, 0.005);
        r.within("eta1", d.eta1, 0.37, 0.005);
        r.within("eta2", d.eta2, 0.26, 0.005);
        r.within("q0", plan.diagnostics.q0, 66, 1);
        r.within("q1", plan.diagnostics.q1, 75, 1);
        r.within("total", plan.diagnostics.total, 93, 1);
    });

    criterion("sweep minima, single center", 300.0, [](Report& r) {
        const auto s = sweep(kRegion, 0.05, 0.2);
        r.detail << "cells=" << s.rows.size() << ' ';
        const auto rows = every_fifth(s.rows);
        sweep_minimum(r, "min_q0", rows, SweepObjective::q0, 60, 1, 45, 0.75);
        sweep_minimum(r, "min_q1", rows, SweepObjective::q1, 75, 1, 55, 0.75);
    });

    criterion("multicenter plan M=4 Hochberg", 0, [](Report& r) {
        const auto t = per_center_targets(4, 0.05, 0.2, ProcedureKind::hochberg);
        r.within("alpha_M", t.alpha_M, 0.05, 1e-12);
        r.within("beta_M_se", t.beta_M_se, 0.054, 0.001);
        const auto plan = plan_multicenter(4, kRegion, 0.05, 0.2, 100, 0.7, ProcedureKind::hochberg);
        r.within("n_one_stage", plan.n_one_stage, 153, 1);
        r.within("n2", plan.design.center_design.n2, 65, 1);
        r.within("eta2", plan.design.center_design.eta2, 0.19, 0.005);
        r.within("q0", plan.center_plan.diagnostics.q0, 118, 1);
        r.within("q1", plan.center_plan.diagnostics.q1, 134, 1);
        SweepOptions opt;
        opt.n1_grid = multiples_of_five(plan.n_one_stage);
        const auto s = sweep(kRegion, t.alpha_M, t.beta_M_se, opt);
        sweep_minimum(r, "min_q0", s.rows, SweepObjective::q0, 113, 1, 85, 0.7);
        sweep_minimum(r, "min_q1", s.rows, SweepObjective::q1, 134, 1, 105, 0.75);
    });

    criterion("Bonferroni comparison", 0, [](Report& r) {
        const auto t = per_center_targets(4, 0.05, 0.2, ProcedureKind::bonferroni);
        const int n = plan_one_stage(kRegion, t.alpha_M, t.beta_M_se, EvaluationMode::exact).n;
        r.within("n_one_stage", n, 209, 1);
        SweepOptions opt;
        opt.n1_grid = multiples_of_five(n);
        const auto s = sweep(kRegion, t.alpha_M, t.beta_M_se, opt);
        sweep_minimum(r, "min_q0", s.rows, SweepObjective::q0, 134, 2, 100, 0.775);
        sweep_minimum(r, "min_q1", s.rows, SweepObjective::q1, 185, 2, 140, 0.875);
        const int total = best_row(s.rows, SweepObjective::total).total;
        r.within("min_total", total, 209, 2);
        bool hit = false;
        for (const auto& row : s.rows)
            if (row.feasible && row.total == total && near_cell(row, 205, 0.55, 5)) hit = true;
        r.check("argmin_has_(205,0.55)", hit);
    });

    criterion("family-wise bound table", 0, [](Report& r) {
        table_cells(r, beta_fw_bound_table(multi_design(), kRegion), kBound, 0.003);
    });

    criterion("exact enumeration tables", 0, [](Report& r) {
        const auto clock = [] { return std::chrono::steady_clock::now(); };
        double slowest = 0;
        auto timed = [&](ProcedureKind kind, MixturePoint point) {
            const auto t0 = clock();
            auto t = beta_fw_table(multi_design(kind), point);
            slowest = std::max(slowest, std::chrono::duration<double>(clock() - t0).count());
            return t;
        };
        table_cells(r, timed(ProcedureKind::hochberg, {2.0, 0.2}), kHochberg2, 0.003);
        table_cells(r, timed(ProcedureKind::hochberg, {1.2, 0.5}), kHochberg12, 0.003);
        table_cells(r, timed(ProcedureKind::benjamini_hochberg, {2.0, 0.2}), kBh2, 0.003);
        table_cells(r, timed(ProcedureKind::benjamini_hochberg, {1.2, 0.5}), kBh12, 0.003);
        r.check("slowest_table_under_30s", slowest < 30.0, Report::fmt(slowest));
    });

    criterion("second-stage probability maximum", 0, [](Report& r) {
        std::vector<double> mu;
        for (int i = 1; i <= 600; ++i) mu.push_back(i * 0.005);
        const std::vector<double> p{1.0};
        const auto d5 = expected_n_alt_max(single_design());
        r.within("single_max", d5.max_second_stage_probability, 0.52, 0.01);
        r.within("single_mu", d5.worst_point.mu, 0.24, 0.01);
        r.within("single_p", d5.worst_point.p, 1.0, 1e-9);
        const auto s5 = second_stage_surface(single_design(), mu, p, EvaluationMode::exact);
        r.within("single_grid_max", *std::max_element(s5.values.begin(), s5.values.end()),
                 d5.max_second_stage_probability, 0.01);
        const auto d8 = expected_n_alt_max(multi_design().center_design);
        r.within("multi_mu", d8.worst_point.mu, 0.17, 0.01);
        r.within("multi_p", d8.worst_point.p, 1.0, 1e-9);
        const auto s8 = second_stage_surface(multi_design().center_design, mu, p, EvaluationMode::exact);
        const auto it = std::max_element(s8.values.begin(), s8.values.end());
        r.within("multi_grid_argmax", mu[static_cast<std::size_t>(it - s8.values.begin())], d8.worst_point.mu, 0.01);
    });

    criterion("Monte Carlo validation", 0, [](Report& r) {
        const auto d = multi_design();
        const auto t0 = std::chrono::steady_clock::now();
        for (auto [point, published] : {std::pair{MixturePoint{2.0, 0.2}, &kEmpirical2},
                                    std::pair{MixturePoint{1.2, 0.5}, &kEmpirical12}}) {
            const auto exact = beta_fw_table(d, point);
            const auto sim = simulated_table(d, point, 1000, 1, false);
            int off = 0, published_off = 0;
            for (const auto& c : exact.cells) {
                const double band = std::max(0.05, 4 * binomial_sd(c.value, 1000));
                if (std::abs(sim.at(c.M1, c.m) - c.value) > band) ++off;
            }
            for (const auto& c : *published) {
                const double v = exact.at(c.M1, c.m);
                if (std::abs(c.v - v) > std::max(0.05, 4 * binomial_sd(v, 1000))) ++published_off;
            }
            r.check("1000_reps_out_of_band", off == 0, std::to_string(off));
            r.check("published_digits_out_of_band", published_off == 0, std::to_string(published_off));
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.check("1000_reps_under_2min", secs < 120, Report::fmt(secs));
        for (auto point : {MixturePoint{2.0, 0.2}, MixturePoint{1.2, 0.5}}) {
            const auto exact = beta_fw_table(d, point);
            const auto sim = simulated_table(d, point, 100000, 2, true);
            double worst_z = 0;
            for (const auto& c : exact.cells) {
                const double sd = binomial_sd(c.value, 100000);
                const double dev = std::abs(sim.at(c.M1, c.m) - c.value);
                worst_z = std::max(worst_z, sd > 0 ? dev / sd : (dev > 0 ? 1e9 : 0.0));
            }
            r.check("1e5_reps_max_sigma", worst_z <= 3.0, Report::fmt(worst_z));
        }
    });

    criterion("random-effect study", 0, [](Report& r) {
        const auto d = multi_design();
        for (auto point : {MixturePoint{2.0, 0.2}, MixturePoint{1.2, 0.5}}) {
            const auto fixed = simulated_table(d, point, 1000, 1, false);
            const auto random = simulated_table(d, point, 1000, 1, false, 0.5);
            int below = 0;
            for (const auto& c : fixed.cells)
                if (random.at(c.M1, c.m) < c.value - 2 * binomial_sd(c.value, 1000)) ++below;
            r.check("cells_below_fixed", below == 0, std::to_string(below));
            if (point.mu == 2.0) r.within("(4,1)", random.at(4, 1), 0.355, 0.05);
        }
    });

    criterion("property suite", 0, [](Report& r) {
        oracle::Lcg rng(2024);
        // D1: one-stage p-values under H0
        {
            std::vector<double> p;
            for (int i = 0; i < 100000; ++i) p.push_back(one_stage_p_value(rng.normal() * std::sqrt(2.0 / 86), 86));
            const double ks = oracle::ks_uniform_pvalue(p);
            r.check("ks_D1", ks > 0.01, Report::fmt(ks));
        }
        // D2: two-stage p-values under H0
        {
            std::vector<double> p;
            for (std::uint64_t i = 0; i < 100000; ++i)
                p.push_back(simulate_center(single_design(), {0.0, 0.0}, 0.0, 99, i, 0, true).p_value);
            const double ks = oracle::ks_uniform_pvalue(p);
            r.check("ks_D2", ks > 0.01, Report::fmt(ks));
        }
        // monotone likelihood ratio
        {
            bool mono = true;
            double prev = -1;
            for (int i = -300; i <= 300; ++i) {
                const double lr = likelihood_ratio_mean(i * 0.01, 20, {1.0, 0.3});
                if (lr < prev) mono = false;
                prev = lr;
            }
            r.check("lr_monotone", mono);
        }
        // beta decreasing in mu and p, increasing in eta
        {
            bool mono = true;
            for (int i = 0; i < 20; ++i)
                for (int j = 0; j < 20; ++j) {
                    const double mu = 0.1 + 0.15 * i, p = 0.05 + 0.045 * j;
                    const double b = beta_single(50, 0.3, {mu, p}, EvaluationMode::exact);
                    if (beta_single(50, 0.3, {mu + 0.15, p}, EvaluationMode::exact) >= b) mono = false;
                    if (beta_single(50, 0.3, {mu, p + 0.045}, EvaluationMode::exact) >= b) mono = false;
                    if (beta_single(50, 0.35, {mu, p}, EvaluationMode::exact) <= b) mono = false;
                }
            r.check("beta_monotone", mono);
        }
        // corners suffice for one-stage and two-stage worst cases
        {
            const int n = 86;
            const double eta = one_stage_threshold(n, 0.05);
            const double corner1 = beta_se_one_stage(kRegion, n, 0.05, EvaluationMode::exact);
            const double corner2 = beta2_se(single_design(), 0.05, kRegion, EvaluationMode::exact);
            double grid1 = 0, grid2 = 0;
            for (int i = 0; i <= 40; ++i)
                for (int j = 0; j <= 40; ++j) {
                    const MixturePoint pt{0.7 + 2.3 * i / 40.0, 0.2 + 0.8 * j / 40.0};
                    if (!kRegion.contains(pt)) continue;
                    grid1 = std::max(grid1, beta_single(n, eta, pt, EvaluationMode::exact));
                    grid2 = std::max(grid2, beta2(single_design(), 0.05, pt, EvaluationMode::exact));
                }
            r.check("corners_one_stage", grid1 <= corner1 + 1e-9);
            r.check("corners_two_stage", grid2 <= corner2 + 1e-6);
        }
        // step-up by sorting vs by counts; Hochberg vs BH at M = 2
        {
            bool same = true, hb = true;
            const StepUpProcedure h4(ProcedureKind::hochberg, 4, 0.05), b4(ProcedureKind::benjamini_hochberg, 4, 0.05);
            const StepUpProcedure h2(ProcedureKind::hochberg, 2, 0.05), b2(ProcedureKind::benjamini_hochberg, 2, 0.05);
            for (int i = 0; i < 10000; ++i) {
                std::vector<double> p(4);
                for (auto& v : p) v = rng.uniform() < 0.3 ? std::round(rng.uniform() * 40) / 400.0 : 0.2 * rng.uniform();
                for (const auto* proc : {&h4, &b4})
                    if (apply_step_up(p, *proc) != apply_step_up_counts(p, *proc)) same = false;
                const std::vector<double> q(p.begin(), p.begin() + 2);
                if (apply_step_up(q, h2) != apply_step_up(q, b2)) hb = false;
            }
            r.check("sorted_vs_counts", same);
            r.check("hochberg_eq_bh_M2", hb);
        }
        // family-wise type I error under the global null
        {
            const long reps = 100000;
            const double fwer = empirical_type1(multi_design(), reps, 3, true);
            r.check("fwer", fwer <= 0.05 + 3 * binomial_sd(0.05, reps), Report::fmt(fwer));
        }
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
