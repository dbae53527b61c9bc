#include "mixplan/cli.hpp"

#include "mixplan/api.hpp"
#include "mixplan/errors.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <optional>

namespace mixplan::cli {
namespace {

struct Common {
    std::vector<double> mu, p;
    std::string region_file;
    double alpha = 0.05;
    double beta_max = 0.2;
    std::string mode;
    std::string out;
    bool force = false;
    int centers = 0;
    std::string procedure;
    std::string format;
};

void add_region(CLI::App* cmd, Common& c)
{
    auto* mu = cmd->add_option("--mu", c.mu, "region mu values, decreasing (e.g. 2,1,0.7)")->delimiter(',');
    auto* p = cmd->add_option("--p", c.p, "region p values, increasing (e.g. 0.2,0.4,0.6)")->delimiter(',');
    auto* file = cmd->add_option("--region", c.region_file, "region JSON file")->check(CLI::ExistingFile);
    mu->needs(p);
    p->needs(mu);
    file->excludes(mu)->excludes(p);
}

void add_rates(CLI::App* cmd, Common& c)
{
    cmd->add_option("--alpha", c.alpha, "overall type I error")->capture_default_str();
    cmd->add_option("--beta-max", c.beta_max, "type II error target")->capture_default_str();
}

void add_targets(CLI::App* cmd, Common& c, bool centers_required)
{
    auto* m = cmd->add_option("--centers", c.centers, "number of centers M")->check(CLI::PositiveNumber);
    if (centers_required) m->required();
    cmd->add_option("--procedure", c.procedure, "hochberg | bh | bonferroni")
        ->check(CLI::IsMember({"hochberg", "bh", "benjamini-hochberg", "bonferroni"}));
}

void add_mode(CLI::App* cmd, Common& c)
{
    cmd->add_option("--mode", c.mode, "exact | approximate")->check(CLI::IsMember({"exact", "approximate", "approx"}));
}

void add_output(CLI::App* cmd, Common& c, bool tables)
{
    cmd->add_option("--out", c.out, "write to file instead of stdout");
    cmd->add_flag("--force", c.force, "overwrite an existing --out file");
    if (tables)
        cmd->add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

Json region_json(const Common& c)
{
    if (!c.region_file.empty()) {
        Json j = parse_json(read_text_file(c.region_file));
        if (j.is_object() && j.contains("region")) j = j["region"];
        return j;
    }
    if (c.mu.empty()) throw ValidationError("a region is required: --mu/--p or --region");
    return {{"mu", c.mu}, {"p", c.p}};
}

Json base_request(const Common& c, bool with_region)
{
    Json req{{"alpha", c.alpha}, {"beta_max", c.beta_max}};
    if (with_region) req["region"] = region_json(c);
    if (!c.mode.empty()) req["mode"] = c.mode;
    if (c.centers > 0) req["M"] = c.centers;
    if (!c.procedure.empty()) req["procedure"] = c.procedure;
    return req;
}

void emit(const Common& c, const std::string& text, std::ostream& out)
{
    if (c.out.empty())
        out << text;
    else
        write_text_file(c.out, text, c.force);
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Two-stage multicenter trial planner for mixture-distributed treatment effects", "mixplan"};
    app.require_subcommand(1);
    Common c;
    std::function<void()> action;

    // plan-one-stage
    auto* one = app.add_subcommand("plan-one-stage", "minimal one-stage sample size");
    add_region(one, c);
    add_rates(one, c);
    add_targets(one, c, false);
    add_mode(one, c);
    add_output(one, c, false);
    one->callback([&] { action = [&] { emit(c, json_text(api::plan_one_stage(base_request(c, true))), out); }; });

    // plan-two-stage / plan-multicenter
    int n1 = 0, n2_cap = 0;
    double alpha0 = 0.0;
    std::optional<double> alpha1;
    bool no_verify = false;
    auto add_two_stage = [&](CLI::App* cmd) {
        cmd->add_option("--n1", n1, "first-stage sample size per arm")->required()->check(CLI::PositiveNumber);
        cmd->add_option("--alpha0", alpha0, "futility level")->required();
        cmd->add_option("--alpha1", alpha1, "early efficacy level (optimized when omitted)");
        cmd->add_option("--n2-cap", n2_cap, "upper bound for the n2 search")->check(CLI::NonNegativeNumber);
        cmd->add_flag("--no-verify", no_verify, "skip the exact-mode check of the chosen n2");
    };
    auto two_stage_request = [&] {
        Json req = base_request(c, true);
        req["n1"] = n1;
        req["alpha0"] = alpha0;
        if (alpha1) req["alpha1"] = *alpha1;
        if (n2_cap > 0) req["n2_cap"] = n2_cap;
        if (no_verify) req["verify_exact"] = false;
        return req;
    };
    auto* two = app.add_subcommand("plan-two-stage", "two-stage design at a given (n1, alpha0)");
    add_region(two, c);
    add_rates(two, c);
    add_targets(two, c, false);
    add_mode(two, c);
    add_two_stage(two);
    add_output(two, c, false);
    two->callback([&] { action = [&] { emit(c, json_text(api::plan_two_stage(two_stage_request())), out); }; });

    auto* multi = app.add_subcommand("plan-multicenter", "multicenter design with a step-up procedure");
    add_region(multi, c);
    add_rates(multi, c);
    add_targets(multi, c, true);
    add_mode(multi, c);
    add_two_stage(multi);
    add_output(multi, c, false);
    multi->callback([&] { action = [&] { emit(c, json_text(api::plan_multicenter(two_stage_request())), out); }; });

    // feasible
    std::optional<int> check_n1;
    std::optional<double> check_alpha0;
    auto* feas = app.add_subcommand("feasible", "feasible (n1, alpha0) region");
    add_region(feas, c);
    add_rates(feas, c);
    add_targets(feas, c, false);
    feas->add_option("--n1", check_n1, "also test this n1")->check(CLI::PositiveNumber);
    feas->add_option("--alpha0", check_alpha0, "also test this alpha0");
    add_output(feas, c, false);
    feas->callback([&] {
        if (check_n1.has_value() != check_alpha0.has_value())
            throw CLI::ValidationError("--n1 and --alpha0 go together");
        action = [&] {
            Json req = base_request(c, true);
            if (check_n1) {
                req["n1"] = *check_n1;
                req["alpha0"] = *check_alpha0;
            }
            emit(c, json_text(api::feasible(req)), out);
        };
    });

    // sweep
    std::string grid_n1, grid_alpha0;
    auto* sw = app.add_subcommand("sweep", "evaluate the (n1, alpha0) grid");
    add_region(sw, c);
    add_rates(sw, c);
    add_targets(sw, c, false);
    sw->add_option("--grid-n1", grid_n1, "start:stop:step (default n1_min:n:1)");
    sw->add_option("--grid-alpha0", grid_alpha0, "start:stop:step (default 0.55:0.95:0.025)");
    sw->add_option("--n2-cap", n2_cap, "upper bound for the n2 search")->check(CLI::NonNegativeNumber);
    add_output(sw, c, true);
    sw->callback([&] {
        action = [&] {
            Json req = base_request(c, true);
            if (!grid_n1.empty()) req["n1_grid"] = grid_n1;
            if (!grid_alpha0.empty()) req["alpha0_grid"] = grid_alpha0;
            if (n2_cap > 0) req["n2_cap"] = n2_cap;
            if (c.format == "json")
                emit(c, json_text(api::sweep(req)), out);
            else
                emit(c, sweep_csv(api::run_sweep(req).rows), out);
        };
    });

    // surface
    std::string design_file, kind, grid_mu, grid_p, svg;
    std::optional<double> surface_alpha;
    auto* surf = app.add_subcommand("surface", "false-negative or second-stage probability surface");
    surf->add_option("--design", design_file, "design JSON (plan output accepted)")->required()->check(CLI::ExistingFile);
    surf->add_option("--kind", kind, "false-negative | second-stage-prob")
        ->check(CLI::IsMember({"false-negative", "second-stage-prob"}));
    surf->add_option("--alpha", surface_alpha, "evaluation level for false-negative (default: design alpha)");
    surf->add_option("--grid-mu", grid_mu, "start:stop:step (default 0:3:0.05)");
    surf->add_option("--grid-p", grid_p, "start:stop:step (default 0:1:0.05)");
    surf->add_option("--svg", svg, "also write an SVG heatmap");
    add_mode(surf, c);
    add_output(surf, c, true);
    surf->callback([&] {
        action = [&] {
            Json req{{"design", parse_json(read_text_file(design_file))}};
            if (!kind.empty()) req["kind"] = kind;
            if (surface_alpha) req["alpha"] = *surface_alpha;
            if (!grid_mu.empty()) req["mu_grid"] = grid_mu;
            if (!grid_p.empty()) req["p_grid"] = grid_p;
            if (!c.mode.empty()) req["mode"] = c.mode;
            const auto s = api::run_surface(req);
            if (!svg.empty())
                write_text_file(svg, surface_svg(s, kind.empty() ? "false-negative" : kind), c.force);
            if (c.format == "json") {
                Json j = to_json(s);
                j["kind"] = kind.empty() ? "false-negative" : kind;
                emit(c, json_text(j), out);
            } else {
                emit(c, surface_csv(s), out);
            }
        };
    });

    // beta-table / simulate share the multicenter design input
    std::vector<double> point;
    std::string method;
    auto add_design = [&](CLI::App* cmd) {
        cmd->add_option("--design", design_file,
                        "multicenter design JSON, or a two-stage design together with --centers")
            ->required()
            ->check(CLI::ExistingFile);
        add_targets(cmd, c, false);
        add_rates(cmd, c);
    };
    auto design_request = [&] {
        const Json d = parse_json(read_text_file(design_file));
        if (c.centers > 0) {
            Json req = base_request(c, false);
            const Json& inner = d.contains("design") ? d["design"] : d;
            req["center_design"] = inner.contains("center_design") ? inner["center_design"] : inner;
            return req;
        }
        return Json{{"design", d}};
    };
    auto point_json = [&]() -> Json {
        if (point.size() != 2) throw ValidationError("--point takes mu,p");
        return {{"mu", point[0]}, {"p", point[1]}};
    };

    auto* table = app.add_subcommand("beta-table", "family-wise type II error table");
    add_design(table);
    table->add_option("--kind", kind, "exact | bound")->check(CLI::IsMember({"exact", "bound"}));
    table->add_option("--point", point, "strong-effect point mu,p (exact tables)")->delimiter(',');
    table->add_option("--method", method, "collapsed | full")->check(CLI::IsMember({"collapsed", "full"}));
    add_region(table, c);
    add_mode(table, c);
    add_output(table, c, true);
    table->callback([&] {
        action = [&] {
            Json req = design_request();
            req["kind"] = kind.empty() ? "exact" : kind;
            if (!point.empty()) req["strong_point"] = point_json();
            if (!method.empty()) req["method"] = method;
            if (!c.mode.empty()) req["mode"] = c.mode;
            if (req["kind"] == "bound") req["region"] = region_json(c);
            const auto t = api::run_beta_table(req);
            emit(c, c.format == "json" ? json_text(to_json(t)) : error_table_csv(t), out);
        };
    });

    int m1 = 0;
    double delta = 0.0;
    long replications = 1000;
    long seed = 1;
    bool known_sigma = false;
    std::string effect;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo error rates");
    add_design(sim);
    sim->add_option("--m1", m1, "strong-effect centers (0: all-null rejection rate)")->required()->check(CLI::NonNegativeNumber);
    sim->add_option("--point", point, "strong-effect point mu,p")->delimiter(',');
    sim->add_option("--delta", delta, "random-effect s.d.")->check(CLI::NonNegativeNumber);
    sim->add_option("--replications", replications, "replications")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "RNG seed")->capture_default_str()->check(CLI::NonNegativeNumber);
    sim->add_option("--random-effect", effect, "center (default) | patient: where delta enters")
        ->check(CLI::IsMember({"patient", "center"}));
    sim->add_flag("--known-sigma", known_sigma, "standardize by the true sigma instead of the control estimate");
    add_output(sim, c, true);
    sim->callback([&] {
        action = [&] {
            Json req = design_request();
            req["M1"] = m1;
            req["replications"] = replications;
            req["seed"] = seed;
            req["known_sigma"] = known_sigma;
            if (m1 == 0) {
                emit(c, json_text(api::simulate(req)), out);
                return;
            }
            req["strong_point"] = point_json();
            req["delta"] = delta;
            if (!effect.empty()) req["random_effect"] = effect;
            const auto r = api::run_simulate(req);
            emit(c, c.format == "json" ? json_text(to_json(r)) : simulation_csv(r), out);
        };
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        action();
        return 0;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mixplan::cli
